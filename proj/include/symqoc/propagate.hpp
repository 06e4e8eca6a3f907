#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "symqoc/adjoint.hpp"
#include "symqoc/model.hpp"
#include "symqoc/schedule.hpp"

namespace symqoc {

/// exp(-i s H) held as H = V diag(lambda) V^dagger.
class HermitianExponential {
 public:
  HermitianExponential(const DenseMatrix& h, double scale) : scale_(scale) {
    require(h.rows() == h.cols(), "expm_hermitian: matrix must be square");
    if (h.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    values_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    phases_ = (values_.cast<cplx>() * cplx(0.0, -scale_)).array().exp().matrix();
  }

  double scale() const { return scale_; }
  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const DenseMatrix& eigenvectors() const { return vectors_; }

  DenseMatrix unitary() const { return vectors_ * phases_.asDiagonal() * vectors_.adjoint(); }

  DenseVector apply(const DenseVector& x) const {
    return vectors_ * phases_.cwiseProduct(vectors_.adjoint() * x);
  }
  DenseVector apply_adjoint(const DenseVector& x) const {
    return vectors_ * phases_.conjugate().cwiseProduct(vectors_.adjoint() * x);
  }

  /// Phi_ab = exp(-i s (l_a + l_b)/2) sinc(s (l_a - l_b)/2), the divided
  /// difference of exp(-i s l) written without cancellation.
  DenseMatrix divided_differences() const {
    const Eigen::Index d = values_.size();
    DenseMatrix phi(d, d);
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index a = 0; a < d; ++a) {
        const double half = 0.5 * scale_ * (values_[a] - values_[b]);
        const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
        phi(a, b) = std::polar(sinc, -0.5 * scale_ * (values_[a] + values_[b]));
      }
    return phi;
  }

  /// d/de exp(-i s (H + e D)) at e = 0.
  DenseMatrix derivative(const DenseMatrix& direction) const {
    const DenseMatrix rotated = vectors_.adjoint() * direction * vectors_;
    return cplx(0.0, -scale_) * (vectors_ * rotated.cwiseProduct(divided_differences()) * vectors_.adjoint());
  }

  /// G with <bra| dU(D) |ket> = -i s Tr(D G) for every direction D.
  DenseMatrix overlap_kernel(const DenseVector& bra, const DenseVector& ket) const {
    const DenseVector kb = vectors_.adjoint() * ket;
    const DenseVector bb = vectors_.adjoint() * bra;
    const DenseMatrix k = divided_differences().cwiseProduct(kb * bb.adjoint());
    return vectors_ * k * vectors_.adjoint();
  }

 private:
  double scale_;
  Eigen::VectorXd values_;
  DenseMatrix vectors_;
  DenseVector phases_;
};

/// exp(-i scale H); diagonal input stays diagonal.
inline OperatorMatrix expm_hermitian(const OperatorMatrix& h, double scale) {
  if (!h.hermitian()) throw ValidationError("expm_hermitian requires a certified Hermitian operator");
  if (h.storage() == Storage::diagonal) {
    const DenseVector d = h.diagonal_entries();
    return OperatorMatrix::diagonal((d.real().cast<cplx>() * cplx(0.0, -scale)).array().exp().matrix());
  }
  return OperatorMatrix::dense(HermitianExponential(h.to_dense(), scale).unitary());
}

/// Tr(D G) = sum_ij D_ij G_ji.
inline cplx trace_product(const SparseMatrix& d, const DenseMatrix& g) {
  cplx s = 0.0;
  for (Eigen::Index c = 0; c < d.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(d, c); it; ++it) s += it.value() * g(it.col(), it.row());
  return s;
}

inline double unitarity_deviation(const DenseMatrix& u) {
  if (u.size() == 0) return 0.0;
  return (u.adjoint() * u - DenseMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

/// F = |Tr(Ka^dagger Kb) / dim|^2.
inline double unitary_fidelity(const DenseMatrix& ka, const DenseMatrix& kb) {
  require(ka.rows() == kb.rows() && ka.cols() == kb.cols(), "fidelity: dimension mismatch");
  require(ka.rows() > 0, "fidelity: empty operators");
  const cplx tr = ka.conjugate().cwiseProduct(kb).sum();
  return std::norm(tr / static_cast<double>(ka.rows()));
}

inline double unitary_fidelity(const OperatorMatrix& ka, const OperatorMatrix& kb) {
  return unitary_fidelity(ka.to_dense(), kb.to_dense());
}

enum class Backend { full, first_block_s, first_block_d };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::full: return "full";
    case Backend::first_block_s: return "first-block-s";
    case Backend::first_block_d: return "first-block-d";
  }
  return "?";
}

inline Backend parse_backend(const std::string& s) {
  if (s == "full") return Backend::full;
  if (s == "first-block-s" || s == "first_block_s") return Backend::first_block_s;
  if (s == "first-block-d" || s == "first_block_d") return Backend::first_block_d;
  throw ValidationError("unknown backend '" + s + "' (expected full, first-block-s or first-block-d)");
}

inline constexpr int kMaxFullBackend = 12;
inline constexpr double kSupportTol = 1e-12;
inline constexpr double kNormTol = 1e-10;

/// Model operators expressed in one backend's coordinates.
class BackendSpace {
 public:
  BackendSpace(const ModelConfig& model, Backend backend) : model_(model), backend_(backend) {
    model.validate();
    const auto ops = realize_model_guarded(model, backend);
    if (backend == Backend::full) {
      h0_ = ops.h0.to_dense();
      for (std::size_t c = 0; c < ops.hx.size(); ++c) {
        hx_.push_back(ops.hx[c].to_sparse());
        hy_.push_back(ops.hy[c].to_sparse());
      }
      return;
    }
    adjoint_ = build_first_block(model.n, backend == Backend::first_block_s ? GroupKind::symmetric : GroupKind::dihedral);
    h0_ = compress(ops.h0, *adjoint_);
    for (std::size_t c = 0; c < ops.hx.size(); ++c) {
      hx_.push_back(transform(ops.hx[c], *adjoint_).to_sparse());
      hy_.push_back(transform(ops.hy[c], *adjoint_).to_sparse());
    }
  }

  Backend backend() const { return backend_; }
  const ModelConfig& model() const { return model_; }
  Eigen::Index dim() const { return h0_.rows(); }
  std::size_t channels() const { return hx_.size(); }
  const DenseMatrix& h0() const { return h0_; }
  const SparseMatrix& hx(std::size_t c) const { return hx_[c]; }
  const SparseMatrix& hy(std::size_t c) const { return hy_[c]; }
  const std::optional<AdjointMatrix>& adjoint() const { return adjoint_; }

  /// Full-space state to backend coordinates; fails if the state leaks out of block 1.
  DenseVector project(const DenseVector& full) const {
    require(full.size() == static_cast<Eigen::Index>(hilbert_dim(model_.n)), "state dimension must be 2^n");
    if (!adjoint_) return full;
    const DenseVector c = adjoint_->coordinates(full);
    const double support = c.squaredNorm() / full.squaredNorm();
    if (!(support >= 1.0 - kSupportTol))
      throw ValidationError("initial state outside the backend subspace (block-1 weight " + std::to_string(support) + ")");
    return c;
  }

  DenseVector lift(const DenseVector& coords) const { return adjoint_ ? adjoint_->embed(coords) : coords; }

  DenseVector fock_state(std::uint32_t index) const {
    DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(hilbert_dim(model_.n)));
    require(index < hilbert_dim(model_.n), "Fock index out of range");
    v[index] = 1.0;
    return project(v);
  }

  /// H0 + sum_c Bx_c Hx_c + By_c Hy_c at step j.
  DenseMatrix hamiltonian(const PulseSchedule& s, int j) const {
    require(s.channels() == static_cast<int>(channels()), "schedule has " + std::to_string(s.channels()) +
                                                              " control channels, model has " + std::to_string(channels()));
    DenseMatrix h = h0_;
    for (std::size_t c = 0; c < channels(); ++c) {
      const auto r = static_cast<Eigen::Index>(c);
      if (s.bx(r, j) != 0.0) h += s.bx(r, j) * hx_[c];
      if (s.by(r, j) != 0.0) h += s.by(r, j) * hy_[c];
    }
    return h;
  }

  HermitianExponential step_exponential(const PulseSchedule& s, int j) const {
    return HermitianExponential(hamiltonian(s, j), s.tau);
  }

 private:
  static ModelOperators realize_model_guarded(const ModelConfig& model, Backend backend) {
    if (backend == Backend::full)
      require(model.n <= kMaxFullBackend, "full backend limited to n <= " + std::to_string(kMaxFullBackend));
    if (backend != Backend::full)
      require(model.control == ControlMode::global, "first-block backends need global controls");
    if (backend == Backend::first_block_s)
      require(!model.coupled(), "first-block-s backend needs an uncoupled model (couplings break S_n)");
    if (backend == Backend::first_block_d) require(model.n >= 3, "first-block-d backend needs n >= 3");
    return realize_model(model);
  }

  ModelConfig model_;
  Backend backend_;
  DenseMatrix h0_;
  std::vector<SparseMatrix> hx_, hy_;
  std::optional<AdjointMatrix> adjoint_;
};

inline void check_norm(const DenseVector& psi, int step) {
  const double nrm = psi.norm();
  if (!(std::abs(nrm - 1.0) <= kNormTol))
    throw NumericalError("state norm " + std::to_string(nrm) + " after step " + std::to_string(step));
}

/// psi_{j+1} = exp(-i tau (H0 + Bx Hx + By Hy)) psi_j.
inline DenseVector step(const DenseVector& psi, const OperatorMatrix& h0, const OperatorMatrix& hx,
                        const OperatorMatrix& hy, double bx, double by, double tau) {
  require(psi.size() == h0.dim() && hx.dim() == h0.dim() && hy.dim() == h0.dim(), "step: dimension mismatch");
  DenseMatrix h = h0.to_dense();
  if (bx != 0.0) h += bx * hx.to_dense();
  if (by != 0.0) h += by * hy.to_dense();
  return HermitianExponential(h, tau).apply(psi);
}

struct PropagationResult {
  DenseVector final_state;
  std::vector<DenseVector> trajectory;  ///< psi_0..psi_N when requested
};

inline PropagationResult propagate_all(const BackendSpace& space, const DenseVector& psi0, const PulseSchedule& s,
                                       bool store_trajectory = false) {
  s.validate();
  require(psi0.size() == space.dim(), "initial state dimension does not match backend");
  PropagationResult r{psi0, {}};
  if (store_trajectory) r.trajectory.reserve(static_cast<std::size_t>(s.steps()) + 1);
  if (store_trajectory) r.trajectory.push_back(psi0);
  for (int j = 0; j < s.steps(); ++j) {
    r.final_state = space.step_exponential(s, j).apply(r.final_state);
    check_norm(r.final_state, j);
    if (store_trajectory) r.trajectory.push_back(r.final_state);
  }
  return r;
}

/// Product U_{N-1} ... U_0 in backend coordinates.
inline DenseMatrix propagator(const BackendSpace& space, const PulseSchedule& s) {
  DenseMatrix k = DenseMatrix::Identity(space.dim(), space.dim());
  for (int j = 0; j < s.steps(); ++j) k = space.step_exponential(s, j).unitary() * k;
  return k;
}

/// CSV `step,time,...`: re/im pairs for first-block backends, populations for full.
inline void write_trajectory_csv(std::ostream& os, const BackendSpace& space, const PulseSchedule& s,
                                 const std::vector<DenseVector>& traj) {
  const bool amplitudes = space.backend() != Backend::full;
  os << "step,time";
  for (Eigen::Index k = 0; k < space.dim(); ++k) {
    if (amplitudes)
      os << ",re" << k << ",im" << k;
    else
      os << ",p" << k;
  }
  os << '\n';
  char buf[64];
  for (std::size_t j = 0; j < traj.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g", j, static_cast<double>(j) * s.tau);
    os << buf;
    for (Eigen::Index k = 0; k < traj[j].size(); ++k) {
      if (amplitudes)
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", traj[j][k].real(), traj[j][k].imag());
      else
        std::snprintf(buf, sizeof buf, ",%.17g", std::norm(traj[j][k]));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace symqoc
