#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "symqoc/propagate.hpp"

namespace symqoc {

inline constexpr double kAllowedElementTol = 1e-10;
inline constexpr double kGapTol = 1e-9;

struct CascadeLevel {
  double energy = 0.0;
  std::string label;
  int weight = 0;  ///< down-spin count of the basis state
};

struct Transition {
  int from = 0;  ///< lower level index
  int to = 0;
  double delta = 0.0;
};

/// Block-1 levels in ascending energy and the transitions H_x allows between them.
struct EnergyCascade {
  std::vector<CascadeLevel> levels;
  std::vector<Transition> gaps;
};

namespace detail {

inline std::vector<int> column_weights(const AdjointMatrix& a) {
  std::vector<int> w(static_cast<std::size_t>(a.cols()), 0);
  for (Eigen::Index c = 0; c < a.matrix.outerSize(); ++c) {
    SparseMatrix::InnerIterator it(a.matrix, c);
    if (it) w[static_cast<std::size_t>(c)] = std::popcount(static_cast<std::uint32_t>(it.row()));
  }
  return w;
}

inline bool is_diagonal(const DenseMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != 0.0) return false;
  return true;
}

}  // namespace detail

inline EnergyCascade energy_cascade(const ModelConfig& model, Backend backend) {
  require(backend != Backend::full, "energy cascade needs a first-block backend");
  ModelConfig m = model;
  m.control = ControlMode::global;
  const BackendSpace space(m, backend);
  const AdjointMatrix& a = *space.adjoint();
  const auto weights = detail::column_weights(a);
  const Eigen::Index d = space.dim();

  DenseMatrix hx = DenseMatrix(space.hx(0));
  std::vector<double> energy(static_cast<std::size_t>(d));
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  if (detail::is_diagonal(space.h0())) {
    for (Eigen::Index k = 0; k < d; ++k) energy[static_cast<std::size_t>(k)] = space.h0()(k, k).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return energy[static_cast<std::size_t>(x)] < energy[static_cast<std::size_t>(y)];
    });
  } else {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(space.h0());
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    for (Eigen::Index k = 0; k < d; ++k) energy[static_cast<std::size_t>(k)] = solver.eigenvalues()[k];
    hx = solver.eigenvectors().adjoint() * hx * solver.eigenvectors();
  }

  EnergyCascade c;
  std::vector<int> position(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto src = static_cast<std::size_t>(order[k]);
    position[src] = static_cast<int>(k);
    c.levels.push_back({energy[src], a.blocks.first_block_basis_labels[src], weights[src]});
  }
  for (Eigen::Index x = 0; x < d; ++x)
    for (Eigen::Index y = x + 1; y < d; ++y) {
      if (std::abs(hx(x, y)) <= kAllowedElementTol) continue;
      int lo = position[static_cast<std::size_t>(x)], hi = position[static_cast<std::size_t>(y)];
      if (lo > hi) std::swap(lo, hi);
      c.gaps.push_back({lo, hi, c.levels[static_cast<std::size_t>(hi)].energy - c.levels[static_cast<std::size_t>(lo)].energy});
    }
  std::sort(c.gaps.begin(), c.gaps.end(), [](const Transition& p, const Transition& q) {
    return std::tie(p.from, p.to) < std::tie(q.from, q.to);
  });
  return c;
}

/// Distinct allowed |dE| values, clustered under tol.
inline std::vector<double> distinct_gaps(const EnergyCascade& c, double tol = kGapTol) {
  std::vector<double> g;
  for (const auto& t : c.gaps) g.push_back(std::abs(t.delta));
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double v : g)
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  return out;
}

inline int count_distinct_gaps(const EnergyCascade& c, double tol = kGapTol) {
  return static_cast<int>(distinct_gaps(c, tol).size());
}

inline void write_cascade_csv(std::ostream& os, const EnergyCascade& c) {
  char buf[128];
  os << "index,energy,label\n";
  for (std::size_t k = 0; k < c.levels.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,", k, c.levels[k].energy);
    os << buf << c.levels[k].label << '\n';
  }
  os << "from,to,gap\n";
  for (const auto& t : c.gaps) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", t.from, t.to, t.delta);
    os << buf;
  }
}

/// Signature count bounding the number of distinct allowed gaps: a spin flip at
/// site i costs B_z + (1/2) sum_k c_k (z_{i-k} + z_{i+k}), so flips sharing the
/// neighbour sums (s_1..s_K) share a gap.
inline int flip_signature_count(int n, int offsets) {
  check_qubit_count(n);
  std::set<std::vector<int>> seen;
  for (std::uint32_t x = 0; x < hilbert_dim(n); ++x)
    for (int i = 1; i <= n; ++i) {
      if (spin_z(n, x, i) < 0) continue;
      std::vector<int> sig;
      for (int k = 1; k <= offsets; ++k)
        sig.push_back(spin_z(n, x, ring_partner(n, i, n - k)) + spin_z(n, x, ring_partner(n, i, k)));
      seen.insert(std::move(sig));
    }
  return static_cast<int>(seen.size());
}

struct CascadeReport {
  bool adjacent_weights_only = true;
  double direct_element = 0.0;  ///< |<all-down|H_x|all-up>| in block 1
  double max_forbidden = 0.0;
  bool pass = true;
};

/// H_x in block 1 only links Hamming-weight classes w and w+1.
inline CascadeReport cascade_structure_check(const ModelConfig& model, Backend backend) {
  require(backend != Backend::full, "cascade check needs a first-block backend");
  ModelConfig m = model;
  m.control = ControlMode::global;
  const BackendSpace space(m, backend);
  const auto weights = detail::column_weights(*space.adjoint());
  const DenseMatrix hx = DenseMatrix(space.hx(0));
  CascadeReport r;
  int up = -1, down = -1;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0) up = static_cast<int>(k);
    if (weights[k] == m.n) down = static_cast<int>(k);
  }
  for (Eigen::Index x = 0; x < hx.rows(); ++x)
    for (Eigen::Index y = 0; y < hx.cols(); ++y)
      if (std::abs(weights[static_cast<std::size_t>(x)] - weights[static_cast<std::size_t>(y)]) != 1)
        r.max_forbidden = std::max(r.max_forbidden, std::abs(hx(x, y)));
  r.adjacent_weights_only = r.max_forbidden <= kAllowedElementTol;
  if (up >= 0 && down >= 0) r.direct_element = std::abs(hx(down, up));
  r.pass = r.adjacent_weights_only && (m.n < 2 || r.direct_element <= kAllowedElementTol);
  return r;
}

struct SpectralPeak {
  double frequency = 0.0;
  double magnitude = 0.0;
};

struct PeakSettings {
  double relative_threshold = 0.05;
  double min_separation_bins = 3.0;
  bool hann_window = true;
};

/// |eps(w)| on w >= 0 with eps(w) = tau/sqrt(2 pi) sum_j B_j exp(-i w t_j).
struct PowerSpectrum {
  double bin = 0.0;  ///< 2 pi / T, the unpadded resolution
  std::size_t padded = 0;
  std::vector<double> frequency;
  std::vector<cplx> ex, ey;
  std::vector<SpectralPeak> peaks_x, peaks_y;

  std::vector<double> magnitude_x() const { return magnitudes(ex); }
  std::vector<double> magnitude_y() const { return magnitudes(ey); }

 private:
  static std::vector<double> magnitudes(const std::vector<cplx>& v) {
    std::vector<double> m;
    m.reserve(v.size());
    for (const auto& z : v) m.push_back(std::abs(z));
    return m;
  }
};

namespace detail {

inline std::vector<cplx> padded_transform(const Eigen::VectorXd& samples, double tau, std::size_t padded, bool hann) {
  std::vector<double> x(padded, 0.0);
  const auto n = static_cast<std::size_t>(samples.size());
  for (std::size_t j = 0; j < n; ++j) {
    const double w = hann ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n)) : 1.0;
    x[j] = w * samples[static_cast<Eigen::Index>(j)];
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, x);
  const double scale = tau / std::sqrt(2.0 * std::numbers::pi);
  out.resize(padded / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    // samples sit at midpoints t_j = (j + 1/2) tau
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(padded) * tau);
    out[k] *= scale * std::polar(1.0, -0.5 * w * tau);
  }
  return out;
}

inline std::vector<SpectralPeak> find_peaks(const std::vector<double>& freq, const std::vector<double>& mag,
                                            double bin, const PeakSettings& ps) {
  const double top = mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
  std::vector<SpectralPeak> cand;
  if (top <= 0.0) return cand;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const bool left = k == 0 || mag[k] > mag[k - 1];
    const bool right = k + 1 == mag.size() || mag[k] >= mag[k + 1];
    if (left && right && mag[k] >= ps.relative_threshold * top) cand.push_back({freq[k], mag[k]});
  }
  std::sort(cand.begin(), cand.end(), [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
  std::vector<SpectralPeak> kept;
  for (const auto& p : cand) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const SpectralPeak& q) {
      return std::abs(q.frequency - p.frequency) >= ps.min_separation_bins * bin;
    });
    if (clear) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end(), [](const SpectralPeak& a, const SpectralPeak& b) { return a.frequency < b.frequency; });
  return kept;
}

}  // namespace detail

/// Spectrum of control channel `channel`. Magnitudes are unwindowed; peaks are
/// located on the (optionally Hann-windowed) magnitude.
inline PowerSpectrum power_spectrum(const PulseSchedule& s, int pad = 8, int channel = 0, const PeakSettings& ps = {}) {
  s.validate();
  require(s.steps() >= 2, "power spectrum needs at least 2 samples");
  require(pad >= 1, "zero-pad factor must be at least 1");
  require(channel >= 0 && channel < s.channels(), "control channel out of range");
  const std::size_t padded = static_cast<std::size_t>(s.steps()) * static_cast<std::size_t>(pad);
  PowerSpectrum p;
  p.bin = 2.0 * std::numbers::pi / (s.steps() * s.tau);
  p.padded = padded;
  const Eigen::VectorXd bx = s.bx.row(channel).transpose(), by = s.by.row(channel).transpose();
  p.ex = detail::padded_transform(bx, s.tau, padded, false);
  p.ey = detail::padded_transform(by, s.tau, padded, false);
  for (std::size_t k = 0; k < p.ex.size(); ++k)
    p.frequency.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(padded) * s.tau));
  auto windowed = [&](const Eigen::VectorXd& x) {
    std::vector<double> m;
    for (const auto& z : detail::padded_transform(x, s.tau, padded, true)) m.push_back(std::abs(z));
    return m;
  };
  const auto mx = ps.hann_window ? windowed(bx) : p.magnitude_x();
  const auto my = ps.hann_window ? windowed(by) : p.magnitude_y();
  p.peaks_x = detail::find_peaks(p.frequency, mx, p.bin, ps);
  p.peaks_y = detail::find_peaks(p.frequency, my, p.bin, ps);
  return p;
}

/// sum |eps|^2 dw over the two-sided axis, from the one-sided arrays.
inline double spectral_energy(const PowerSpectrum& p, const std::vector<cplx>& e) {
  if (p.frequency.size() < 2) return 0.0;
  const double dw = p.frequency[1] - p.frequency[0];
  double sum = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const bool single = k == 0 || (p.padded % 2 == 0 && 2 * k == p.padded);
    sum += (single ? 1.0 : 2.0) * std::norm(e[k]);
  }
  return sum * dw;
}

inline double pulse_energy(const Eigen::VectorXd& b, double tau) { return b.squaredNorm() * tau; }

/// arg(eps_x conj(eps_y)) at the dominant B_x peak; +pi/2 means B_y lags.
inline double phase_lag(const PowerSpectrum& p) {
  require(!p.peaks_x.empty(), "phase lag needs a spectral peak");
  const auto top = std::max_element(p.peaks_x.begin(), p.peaks_x.end(),
                                    [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude < b.magnitude; });
  const auto k = static_cast<std::size_t>(std::lround(top->frequency / (p.frequency[1] - p.frequency[0])));
  return std::arg(p.ex[k] * std::conj(p.ey[k]));
}

inline void write_spectrum_csv(std::ostream& os, const PowerSpectrum& p) {
  os << "freq,abs_ex,abs_ey\n";
  char buf[96];
  for (std::size_t k = 0; k < p.frequency.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.frequency[k], std::abs(p.ex[k]), std::abs(p.ey[k]));
    os << buf;
  }
}

/// Peak-to-gap assignment: each peak's nearest allowed gap and the distance in bins.
struct PeakMatch {
  double peak = 0.0;
  double gap = 0.0;
  double distance_bins = 0.0;
};

inline std::vector<PeakMatch> match_peaks(const std::vector<SpectralPeak>& peaks, const std::vector<double>& gaps,
                                          double bin) {
  std::vector<PeakMatch> out;
  for (const auto& pk : peaks) {
    PeakMatch best{pk.frequency, 0.0, std::numeric_limits<double>::infinity()};
    for (double g : gaps) {
      const double d = std::abs(pk.frequency - g) / bin;
      if (d < best.distance_bins) best = {pk.frequency, g, d};
    }
    out.push_back(best);
  }
  return out;
}

/// Full-coupling config whose distinct allowed-gap count reaches the flip-signature
/// count; tries a fixed list of schedules.
inline ModelConfig choose_degeneracy_breaking_couplings(int n, double bz = kDefaultBz) {
  require(n >= 3, "degeneracy breaking needs n >= 3");
  const int offsets = n / 2;
  const int target = flip_signature_count(n, offsets);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double c0 = kDefaultNearestCoupling;
  const std::vector<std::function<double(int)>> schedules{
      [&](int k) { return c0 / (2 * k - 1); },
      [&](int k) { return c0 * std::pow(golden, -(k - 1)); },
      [&](int k) { return c0 / std::sqrt(static_cast<double>(k * k + 1)) * std::sqrt(2.0); },
  };
  for (const auto& f : schedules) {
    ModelConfig m{n, bz, {}, ControlMode::global};
    for (int k = 1; k <= offsets; ++k) m.couplings.push_back(f(k));
    if (count_distinct_gaps(energy_cascade(m, Backend::first_block_d)) == target) return m;
  }
  throw NumericalError("no coupling schedule breaks the gap degeneracy for n=" + std::to_string(n));
}

}  // namespace symqoc
