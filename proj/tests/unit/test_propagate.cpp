#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "symqoc/propagate.hpp"

using namespace symqoc;

namespace {

PulseSchedule random_schedule(int channels, int steps, double tau, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  PulseSchedule s(channels, steps, tau);
  for (int c = 0; c < channels; ++c)
    for (int j = 0; j < steps; ++j) {
      s.bx(c, j) = u(rng);
      s.by(c, j) = u(rng);
    }
  return s;
}

}  // namespace

TEST(Expm, PauliZ) {
  const double tau = 0.3;
  const auto u = expm_hermitian(embed_single(1, 1, Axis::z), tau);
  EXPECT_EQ(u.storage(), Storage::diagonal);
  EXPECT_NEAR(std::abs(u.coeff(0, 0) - std::polar(1.0, -tau)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.coeff(1, 1) - std::polar(1.0, tau)), 0.0, 1e-15);
}

TEST(Expm, ZeroIsIdentity) {
  auto z = OperatorMatrix::dense(DenseMatrix::Zero(4, 4));
  z.certify_hermitian();
  EXPECT_LE(oracle::max_abs(expm_hermitian(z, 1.0).to_dense() - DenseMatrix::Identity(4, 4)), 1e-15);
}

TEST(Expm, RabiHalfPeriod) {
  const auto x = embed_single(1, 1, Axis::x);
  const DenseMatrix u = expm_hermitian(x, std::numbers::pi / 2).to_dense();
  EXPECT_LE(oracle::max_abs(u - cplx(0, -1) * x.to_dense()), 1e-15);
}

TEST(Expm, MatchesPadeOracleAndIsUnitary) {
  std::mt19937_64 rng(1);
  for (int d : {2, 5, 16, 40}) {
    const oracle::Mat h = oracle::random_hermitian(d, rng);
    auto op = OperatorMatrix::dense(h);
    op.certify_hermitian();
    const DenseMatrix u = expm_hermitian(op, 0.7).to_dense();
    EXPECT_LE(oracle::max_abs(u - oracle::expm(h, 0.7)), 1e-11);
    EXPECT_LE(unitarity_deviation(u), 1e-12);
  }
}

TEST(Expm, RequiresCertifiedHermitian) {
  EXPECT_THROW(expm_hermitian(OperatorMatrix::dense(DenseMatrix::Zero(2, 2)), 1.0), ValidationError);
}

TEST(Expm, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  for (int d : {2, 6, 12}) {
    const oracle::Mat h = oracle::random_hermitian(d, rng);
    const oracle::Mat dir = oracle::random_hermitian(d, rng);
    const double s = 0.9, eps = 1e-6;
    const DenseMatrix fd = (oracle::expm(h + eps * dir, s) - oracle::expm(h - eps * dir, s)) / (2 * eps);
    EXPECT_LE(oracle::max_abs(HermitianExponential(h, s).derivative(dir) - fd), 1e-8);
  }
}

TEST(Expm, DerivativeWithDegenerateSpectrum) {
  const DenseMatrix h = realize(field_sum(3, Axis::z, 1.0)).to_dense();  // degenerate levels
  const DenseMatrix dir = realize(field_sum(3, Axis::x, 1.0)).to_dense();
  const double eps = 1e-6;
  const DenseMatrix fd = (oracle::expm(h + eps * dir, 0.4) - oracle::expm(h - eps * dir, 0.4)) / (2 * eps);
  EXPECT_LE(oracle::max_abs(HermitianExponential(h, 0.4).derivative(dir) - fd), 1e-8);
}

TEST(Step, EigenstateOnlyGainsPhase) {
  const auto ops = realize_model(nearest_neighbor_model(3));
  const DenseVector psi = oracle::basis(8, 5);
  const DenseVector out = step(psi, ops.h0, ops.hx[0], ops.hy[0], 0.0, 0.0, 0.5);
  EXPECT_NEAR(std::norm(out[5]), 1.0, 1e-14);
}

TEST(Step, PiPulseFlipsSpin) {
  const auto zero = realize(PauliTermSum(1));
  const auto hx = realize(field_sum(1, Axis::x, 0.5));
  const auto hy = realize(field_sum(1, Axis::y, 0.5));
  const double tau = 0.25;
  const double bx = std::numbers::pi / tau;  // tau * bx / 2 = pi/2
  const DenseVector out = step(oracle::basis(2, 0), zero, hx, hy, bx, 0.0, tau);
  EXPECT_NEAR(std::norm(out[1]), 1.0, 1e-14);
}

TEST(Backend, FirstBlockMatchesFullAmplitudes) {
  for (int n = 3; n <= 8; ++n) {
    for (const auto& model : {uncoupled_model(n), full_coupling_model(n)}) {
      const BackendSpace full(model, Backend::full);
      const PulseSchedule s = random_schedule(1, 12, 0.2, static_cast<std::uint64_t>(n));
      const DenseVector psi_full = propagate_all(full, full.fock_state(0), s).final_state;
      std::vector<Backend> backs{Backend::first_block_d};
      if (!model.coupled()) backs.push_back(Backend::first_block_s);
      for (Backend b : backs) {
        const BackendSpace fb(model, b);
        const DenseVector coords = propagate_all(fb, fb.fock_state(0), s).final_state;
        EXPECT_LE(oracle::max_abs(fb.adjoint()->coordinates(psi_full) - coords), 1e-10) << n << backend_name(b);
        EXPECT_LE(oracle::max_abs(fb.lift(coords) - psi_full), 1e-10);
      }
    }
  }
}

TEST(Backend, Guards) {
  EXPECT_THROW(BackendSpace(nearest_neighbor_model(4), Backend::first_block_s), ValidationError);
  ModelConfig pq = uncoupled_model(4);
  pq.control = ControlMode::per_qubit;
  EXPECT_THROW(BackendSpace(pq, Backend::first_block_d), ValidationError);
  EXPECT_NO_THROW(BackendSpace(pq, Backend::full));
  EXPECT_THROW(BackendSpace(uncoupled_model(13), Backend::full), ValidationError);
  const BackendSpace fb(uncoupled_model(4), Backend::first_block_s);
  EXPECT_THROW(fb.fock_state(fock_index("uudu")), ValidationError);
}

TEST(PropagateAll, ZeroStepsAndZeroPulses) {
  const BackendSpace full(nearest_neighbor_model(4), Backend::full);
  const DenseVector psi0 = full.fock_state(0);
  EXPECT_EQ(propagate_all(full, psi0, PulseSchedule(1, 0, 0.05)).final_state, psi0);
  const auto r = propagate_all(full, psi0, PulseSchedule(1, 50, 0.05), true);
  EXPECT_NEAR(std::norm(r.final_state[0]), 1.0, 1e-14);
  ASSERT_EQ(r.trajectory.size(), 51u);
  for (const auto& s : r.trajectory) EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(PropagateAll, CompositionOfStepUnitaries) {
  for (int n = 2; n <= 4; ++n) {
    ModelConfig m = uncoupled_model(n, 0.8);
    if (n >= 3) m.couplings = {0.3};
    m.control = ControlMode::per_qubit;
    const BackendSpace full(m, Backend::full);
    const PulseSchedule s = random_schedule(n, 9, 0.3, 40 + static_cast<std::uint64_t>(n));
    DenseMatrix k = DenseMatrix::Identity(full.dim(), full.dim());
    for (int j = 0; j < s.steps(); ++j) {
      const DenseMatrix u = oracle::expm(full.hamiltonian(s, j), s.tau);
      EXPECT_LE(unitarity_deviation(u), 1e-10);
      k = u * k;
    }
    const DenseVector psi0 = full.fock_state(1);
    EXPECT_LE(oracle::max_abs(propagate_all(full, psi0, s).final_state - k * psi0), 1e-10);
    EXPECT_LE(oracle::max_abs(propagator(full, s) - k), 1e-10);
  }
}

TEST(Fidelity, Examples) {
  std::mt19937_64 rng(9);
  const DenseMatrix u = oracle::expm(oracle::random_hermitian(4, rng), 1.0);
  EXPECT_NEAR(unitary_fidelity(u, u), 1.0, 1e-14);
  EXPECT_NEAR(unitary_fidelity(u, std::polar(1.0, 0.7) * u), 1.0, 1e-14);
  EXPECT_NEAR(unitary_fidelity(DenseMatrix::Identity(2, 2), embed_single(1, 1, Axis::x).to_dense()), 0.0, 1e-15);
  const DenseMatrix v = oracle::expm(oracle::random_hermitian(4, rng), 1.0);
  EXPECT_NEAR(unitary_fidelity(u, v), unitary_fidelity(v, u), 1e-15);
  EXPECT_THROW(unitary_fidelity(u, DenseMatrix::Identity(2, 2)), ValidationError);
}

TEST(Trajectory, CsvLayout) {
  const BackendSpace fb(uncoupled_model(3), Backend::first_block_s);
  PulseSchedule s(1, 2, 0.5);
  const auto r = propagate_all(fb, fb.fock_state(0), s, true);
  std::ostringstream os;
  write_trajectory_csv(os, fb, s, r.trajectory);
  const std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), "step,time,re0,im0,re1,im1,re2,im2,re3,im3");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 4);
  const BackendSpace full(uncoupled_model(2), Backend::full);
  std::ostringstream os2;
  write_trajectory_csv(os2, full, s, propagate_all(full, full.fock_state(0), s, true).trajectory);
  EXPECT_EQ(os2.str().substr(0, os2.str().find('\n')), "step,time,p0,p1,p2,p3");
}
