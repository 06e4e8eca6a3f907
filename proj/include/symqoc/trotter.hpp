#pragma once

#include <unsupported/Eigen/KroneckerProduct>

#include <chrono>
#include <future>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "symqoc/propagate.hpp"

namespace symqoc {

/// Permutation adjoint: transformed site t carries original site source[t-1].
inline AdjointMatrix site_permutation_adjoint(int n, const std::vector<int>& source) {
  check_qubit_count(n);
  require(static_cast<int>(source.size()) == n, "site map must list every site once");
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (int s : source) {
    require(s >= 1 && s <= n && !seen[static_cast<std::size_t>(s - 1)]++, "site map is not a permutation");
  }
  const auto d = hilbert_dim(n);
  std::vector<Triplet> trip;
  trip.reserve(d);
  for (std::uint32_t c = 0; c < d; ++c) {
    std::uint32_t r = 0;
    for (int t = 1; t <= n; ++t)
      if (c & site_mask(n, t)) r |= site_mask(n, source[static_cast<std::size_t>(t - 1)]);
    trip.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), 1.0);
  }
  AdjointMatrix a;
  a.n = n;
  a.group = GroupKind::symmetric;
  a.mode = AdjointMode::full;
  a.matrix = SparseMatrix(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  a.matrix.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// A_(i,n): swaps qubit i with qubit n.
inline AdjointMatrix build_swap_adjoint(int i, int n) {
  check_qubit_count(n);
  require(i >= 1 && i <= n, "swap site " + std::to_string(i) + " out of range");
  std::vector<int> source(static_cast<std::size_t>(n));
  std::iota(source.begin(), source.end(), 1);
  std::swap(source[static_cast<std::size_t>(i - 1)], source[static_cast<std::size_t>(n - 1)]);
  AdjointMatrix a = site_permutation_adjoint(n, source);
  a.blocks.sizes.assign(hilbert_dim(n) / 2, 2);
  return a;
}

/// Original row of each transformed column of a permutation adjoint.
inline std::vector<std::uint32_t> gather_table(const AdjointMatrix& a) {
  std::vector<std::uint32_t> g(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index c = 0; c < a.matrix.outerSize(); ++c) {
    SparseMatrix::InnerIterator it(a.matrix, c);
    require(it && it.value() == 1.0, "gather table needs a permutation adjoint");
    g[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(it.row());
  }
  return g;
}

/// One control sample: row of B_x or B_y in a PulseSchedule.
struct ControlRef {
  int row = 0;
  Axis axis = Axis::x;

  double value(const PulseSchedule& s, int j) const {
    return axis == Axis::x ? s.bx(row, j) : s.by(row, j);
  }
  friend bool operator==(const ControlRef&, const ControlRef&) = default;
};

/// B(t) * terms.
struct ControlTerm {
  ControlRef ref;
  PauliTermSum terms;
};

/// exp(-i dt (H0 + sum B H_c)) on the sites I, repeated over the rest of the register.
struct TrotterFactor {
  std::string group;
  std::vector<int> sites;
  double fraction = 1.0;  ///< duration as a fraction of tau
  bool diagonal = false;
  Eigen::VectorXd energies;            ///< diagonal factors: 2^n entries
  std::vector<std::uint32_t> gather;   ///< transformed index -> original index
  DenseMatrix static_local;            ///< 2^k template
  std::vector<std::pair<ControlRef, DenseMatrix>> controls;
  DenseMatrix group_adjoint;           ///< A_G on the k local qubits
  std::vector<std::vector<int>> blocks;  ///< index sets in A_G coordinates

  int local_qubits() const { return static_cast<int>(sites.size()); }
  Eigen::Index local_dim() const { return static_local.rows(); }
  std::size_t repetitions() const { return diagonal ? 1 : gather.size() / static_cast<std::size_t>(local_dim()); }
  bool time_dependent() const { return !controls.empty(); }

  DenseMatrix local_hamiltonian(const PulseSchedule& s, int j) const {
    DenseMatrix h = static_local;
    for (const auto& [ref, m] : controls) {
      const double b = ref.value(s, j);
      if (b != 0.0) h += b * m;
    }
    return h;
  }

  /// One block exponential per declared block, assembled back through A_G.
  DenseMatrix local_unitary(const PulseSchedule& s, int j, double dt) const {
    const DenseMatrix m = group_adjoint.adjoint() * local_hamiltonian(s, j) * group_adjoint;
    DenseMatrix u = DenseMatrix::Zero(m.rows(), m.cols());
    for (const auto& blk : blocks) {
      const auto b = static_cast<Eigen::Index>(blk.size());
      DenseMatrix sub(b, b);
      for (Eigen::Index x = 0; x < b; ++x)
        for (Eigen::Index y = 0; y < b; ++y) sub(x, y) = m(blk[static_cast<std::size_t>(x)], blk[static_cast<std::size_t>(y)]);
      const DenseMatrix e = HermitianExponential(sub, dt).unitary();
      for (Eigen::Index x = 0; x < b; ++x)
        for (Eigen::Index y = 0; y < b; ++y) u(blk[static_cast<std::size_t>(x)], blk[static_cast<std::size_t>(y)]) = e(x, y);
    }
    return group_adjoint * u * group_adjoint.adjoint();
  }

  DenseVector phases(double dt) const {
    return (energies.cast<cplx>() * cplx(0.0, -dt)).array().exp().matrix();
  }
};

/// Ordered factor product for one step.
struct TrotterPlan {
  int n = 0;
  double tau = 0.05;
  std::vector<TrotterFactor> factors;
  std::vector<int> sequence;  ///< factor indices in application order
  bool strang = false;
  std::string coupling_rule;

  /// Exponent of tau in the global error (1 - F scales as tau^(2*order)).
  int declared_order() const { return strang ? 2 : 1; }

  /// Local block dimensions exponentiated per step, counting repeated blocks once.
  std::vector<Eigen::Index> time_dependent_templates() const {
    std::vector<Eigen::Index> t;
    for (const auto& f : factors)
      if (f.time_dependent()) t.push_back(f.local_dim());
    return t;
  }
};

namespace detail {

inline DenseMatrix local_template(const PauliTermSum& sum, const std::vector<int>& sites) {
  const int k = static_cast<int>(sites.size());
  PauliTermSum local(k);
  for (const auto& t : sum.terms()) {
    std::string letters(static_cast<std::size_t>(k), 'I');
    for (int a = 0; a < k; ++a) letters[static_cast<std::size_t>(a)] = t.letter(sites[static_cast<std::size_t>(a)]);
    local.add(PauliString(std::move(letters), t.coefficient()));
  }
  if (local.empty()) return DenseMatrix::Zero(static_cast<Eigen::Index>(hilbert_dim(k)), static_cast<Eigen::Index>(hilbert_dim(k)));
  return realize(local).to_dense();
}

/// Connected components of the nonzero pattern of m.
inline std::vector<std::vector<int>> pattern_components(const Eigen::MatrixXd& pattern) {
  const auto d = static_cast<int>(pattern.rows());
  std::vector<int> comp(static_cast<std::size_t>(d), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < d; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> stack{s}, members;
    comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (int w = 0; w < d; ++w)
        if (comp[static_cast<std::size_t>(w)] < 0 && (pattern(v, w) > 1e-12 || pattern(w, v) > 1e-12)) {
          comp[static_cast<std::size_t>(w)] = comp[static_cast<std::size_t>(s)];
          stack.push_back(w);
        }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

inline void finish_factor(TrotterFactor& f) {
  const DenseMatrix& a = f.group_adjoint;
  Eigen::MatrixXd pattern = (a.adjoint() * f.static_local * a).cwiseAbs();
  for (const auto& c : f.controls) pattern += (a.adjoint() * c.second * a).cwiseAbs();
  f.blocks = pattern_components(pattern);
}

/// Local permutation matrix swapping local positions p and q.
inline DenseMatrix local_swap(int k, int p, int q) {
  std::vector<int> source(static_cast<std::size_t>(k));
  std::iota(source.begin(), source.end(), 1);
  std::swap(source[static_cast<std::size_t>(p - 1)], source[static_cast<std::size_t>(q - 1)]);
  return DenseMatrix(site_permutation_adjoint(k, source).matrix);
}

}  // namespace detail

/// Per-qubit plan: n single-site factors (via A_(i,n)) interleaved with the
/// diagonal coupling factor exp(-i (tau/n) H_cpl).
inline TrotterPlan plan_per_qubit_coupled(const ModelConfig& model, double tau, bool strang = false) {
  model.validate();
  require(model.control == ControlMode::per_qubit, "per-qubit Trotter plan needs per-qubit controls");
  require(std::isfinite(tau) && tau > 0.0, "Trotter step must be positive");
  const int n = model.n;
  TrotterPlan plan;
  plan.n = n;
  plan.tau = tau;
  plan.strang = strang;
  plan.coupling_rule = "tau/n";
  int coupling = -1;
  if (model.coupled()) {
    TrotterFactor c;
    c.group = "D" + std::to_string(n);
    c.sites.resize(static_cast<std::size_t>(n));
    std::iota(c.sites.begin(), c.sites.end(), 1);
    c.fraction = 1.0 / n;
    c.diagonal = true;
    c.energies = realize(coupling_sum(n, model.couplings)).diagonal_entries().real();
    coupling = 0;
    plan.factors.push_back(std::move(c));
  }
  const DenseMatrix sx = embed_single(1, 1, Axis::x).to_dense() * 0.5;
  const DenseMatrix sy = embed_single(1, 1, Axis::y).to_dense() * 0.5;
  const DenseMatrix sz = embed_single(1, 1, Axis::z).to_dense() * 0.5;
  std::vector<int> single(static_cast<std::size_t>(n) + 1, -1);
  for (int i = 1; i <= n; ++i) {
    TrotterFactor f;
    f.group = "S1";
    f.sites = {i};
    f.gather = gather_table(build_swap_adjoint(i, n));
    f.static_local = model.bz * sz;
    f.controls = {{{i - 1, Axis::x}, sx}, {{i - 1, Axis::y}, sy}};
    f.group_adjoint = DenseMatrix::Identity(2, 2);
    detail::finish_factor(f);
    single[static_cast<std::size_t>(i)] = static_cast<int>(plan.factors.size());
    plan.factors.push_back(std::move(f));
  }
  // U = prod_{i=1..n} [E_i C], so C then E_n act first.
  for (int i = n; i >= 1; --i) {
    if (coupling >= 0) plan.sequence.push_back(coupling);
    plan.sequence.push_back(single[static_cast<std::size_t>(i)]);
  }
  return plan;
}

/// General grouping: all diagonal static terms form one factor; remaining
/// static and control strings are grouped by support, sorted to the last
/// qubits (A_I) and reduced by the product of symmetric groups over sites
/// that carry identical letters in every term (A_G).
inline TrotterPlan plan_general(const PauliTermSum& h0, const std::vector<ControlTerm>& controls, double tau,
                                bool strang = false) {
  const int n = h0.n();
  require(std::isfinite(tau) && tau > 0.0, "Trotter step must be positive");
  for (const auto& c : controls) {
    require(c.terms.n() == n, "control terms must act on the same register");
    require(c.ref.axis != Axis::z, "controls are B_x or B_y samples");
  }
  TrotterPlan plan;
  plan.n = n;
  plan.tau = tau;
  plan.strang = strang;
  plan.coupling_rule = "tau";

  PauliTermSum diag(n);
  struct Group {
    std::vector<int> support;
    PauliTermSum statics;
    std::vector<std::pair<ControlRef, PauliTermSum>> ctrl;
  };
  std::vector<Group> groups;
  std::map<std::vector<int>, std::size_t> index;
  auto group_for = [&](const std::vector<int>& support) -> Group& {
    auto [it, fresh] = index.try_emplace(support, groups.size());
    if (fresh) groups.push_back({support, PauliTermSum(n), {}});
    return groups[it->second];
  };
  for (const auto& t : h0.terms()) {
    if (t.support().empty()) continue;  // identity only shifts the global phase
    if (t.is_diagonal())
      diag.add(t);
    else
      group_for(t.support()).statics.add(t);
  }
  for (const auto& c : controls)
    for (const auto& t : c.terms.terms()) {
      if (t.support().empty()) continue;
      Group& g = group_for(t.support());
      auto it = std::find_if(g.ctrl.begin(), g.ctrl.end(), [&](const auto& p) { return p.first == c.ref; });
      if (it == g.ctrl.end()) {
        g.ctrl.emplace_back(c.ref, PauliTermSum(n));
        it = std::prev(g.ctrl.end());
      }
      it->second.add(t);
    }

  if (!diag.empty()) {
    TrotterFactor f;
    f.group = "diag";
    f.diagonal = true;
    for (int i = 1; i <= n; ++i) f.sites.push_back(i);
    f.energies = realize(diag).diagonal_entries().real();
    plan.sequence.push_back(static_cast<int>(plan.factors.size()));
    plan.factors.push_back(std::move(f));
  }

  for (const auto& g : groups) {
    // letter classes: sites that every string treats alike
    std::vector<const PauliString*> strings;
    for (const auto& t : g.statics.terms()) strings.push_back(&t);
    for (const auto& c : g.ctrl)
      for (const auto& t : c.second.terms()) strings.push_back(&t);
    std::vector<std::vector<int>> classes;
    for (int s : g.support) {
      auto same = std::find_if(classes.begin(), classes.end(), [&](const std::vector<int>& cls) {
        return std::all_of(strings.begin(), strings.end(), [&](const PauliString* p) { return p->letter(cls.front()) == p->letter(s); });
      });
      if (same == classes.end())
        classes.push_back({s});
      else
        same->push_back(s);
    }

    TrotterFactor f;
    for (const auto& cls : classes) f.sites.insert(f.sites.end(), cls.begin(), cls.end());
    const int k = static_cast<int>(f.sites.size());
    std::vector<int> source;
    for (int s = 1; s <= n; ++s)
      if (std::find(f.sites.begin(), f.sites.end(), s) == f.sites.end()) source.push_back(s);
    source.insert(source.end(), f.sites.begin(), f.sites.end());
    f.gather = gather_table(site_permutation_adjoint(n, source));
    f.static_local = detail::local_template(g.statics, f.sites);
    for (const auto& c : g.ctrl) f.controls.emplace_back(c.first, detail::local_template(c.second, f.sites));

    f.group_adjoint = DenseMatrix::Identity(1, 1);
    for (const auto& cls : classes) {
      const auto m = static_cast<int>(cls.size());
      const DenseMatrix ag = DenseMatrix(build_full_adjoint(m, GroupKind::symmetric).matrix);
      f.group_adjoint = Eigen::kroneckerProduct(f.group_adjoint, ag).eval();
      f.group += (f.group.empty() ? "S" : "xS") + std::to_string(m);
    }

    // certify: every template commutes with the transpositions inside each class
    int pos = 1;
    for (const auto& cls : classes) {
      for (int a = 0; a + 1 < static_cast<int>(cls.size()); ++a) {
        const DenseMatrix p = detail::local_swap(k, pos + a, pos + a + 1);
        auto check = [&](const DenseMatrix& h) {
          if ((p * h * p.adjoint() - h).cwiseAbs().maxCoeff() > 1e-12)
            throw NumericalError("Trotter factor template breaks its declared symmetry " + f.group);
        };
        check(f.static_local);
        for (const auto& c : f.controls) check(c.second);
      }
      pos += static_cast<int>(cls.size());
    }
    detail::finish_factor(f);
    plan.sequence.push_back(static_cast<int>(plan.factors.size()));
    plan.factors.push_back(std::move(f));
  }
  return plan;
}

/// Applies one factor to every column of k.
inline void apply_factor(const TrotterFactor& f, const PulseSchedule& s, int j, double dt, DenseMatrix& k) {
  if (f.diagonal) {
    const DenseVector ph = f.phases(dt);
    const double* p = reinterpret_cast<const double*>(ph.data());
    const Eigen::Index rows = k.rows();
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      double* col = reinterpret_cast<double*>(k.col(c).data());
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double pr = p[2 * r], pi = p[2 * r + 1], xr = col[2 * r], xi = col[2 * r + 1];
        col[2 * r] = pr * xr - pi * xi;
        col[2 * r + 1] = pr * xi + pi * xr;
      }
    }
    return;
  }
  const DenseMatrix u = f.local_unitary(s, j, dt);
  const Eigen::Index m = u.rows();
  const std::size_t reps = f.repetitions();
  if (m == 2) {
    const double ar = u(0, 0).real(), ai = u(0, 0).imag(), br = u(0, 1).real(), bi = u(0, 1).imag();
    const double cr = u(1, 0).real(), ci = u(1, 0).imag(), dr = u(1, 1).real(), di = u(1, 1).imag();
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      double* col = reinterpret_cast<double*>(k.col(c).data());
      for (std::size_t r = 0; r < reps; ++r) {
        double* x = col + 2 * f.gather[2 * r];
        double* y = col + 2 * f.gather[2 * r + 1];
        const double xr = x[0], xi = x[1], yr = y[0], yi = y[1];
        x[0] = ar * xr - ai * xi + br * yr - bi * yi;
        x[1] = ar * xi + ai * xr + br * yi + bi * yr;
        y[0] = cr * xr - ci * xi + dr * yr - di * yi;
        y[1] = cr * xi + ci * xr + dr * yi + di * yr;
      }
    }
    return;
  }
  DenseVector in(m), out(m);
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    auto col = k.col(c);
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t base = r * static_cast<std::size_t>(m);
      for (Eigen::Index a = 0; a < m; ++a) in[a] = col[f.gather[base + static_cast<std::size_t>(a)]];
      out.noalias() = u * in;
      for (Eigen::Index a = 0; a < m; ++a) col[f.gather[base + static_cast<std::size_t>(a)]] = out[a];
    }
  }
}

/// k <- U_j^LTS k (state vectors are single-column matrices).
inline void apply_trotter_step(const TrotterPlan& plan, const PulseSchedule& s, int j, DenseMatrix& k) {
  require(k.rows() == static_cast<Eigen::Index>(hilbert_dim(plan.n)), "Trotter step: dimension mismatch");
  const double half = plan.strang ? 0.5 : 1.0;
  for (int idx : plan.sequence) {
    const auto& f = plan.factors[static_cast<std::size_t>(idx)];
    apply_factor(f, s, j, half * f.fraction * plan.tau, k);
  }
  if (!plan.strang) return;
  for (auto it = plan.sequence.rbegin(); it != plan.sequence.rend(); ++it) {
    const auto& f = plan.factors[static_cast<std::size_t>(*it)];
    apply_factor(f, s, j, half * f.fraction * plan.tau, k);
  }
}

inline DenseVector apply_trotter_step(const TrotterPlan& plan, const PulseSchedule& s, int j, const DenseVector& psi) {
  DenseMatrix k = psi;
  apply_trotter_step(plan, s, j, k);
  return k.col(0);
}

/// Full 2^n matrix of one factor, A (I (x) u) A^dagger, for checks.
inline DenseMatrix factor_matrix(const TrotterFactor& f, int n, const PulseSchedule& s, int j, double dt) {
  DenseMatrix k = DenseMatrix::Identity(static_cast<Eigen::Index>(hilbert_dim(n)), static_cast<Eigen::Index>(hilbert_dim(n)));
  apply_factor(f, s, j, dt, k);
  return k;
}

/// First-order derivative -i dt H_c U of a factor's local block with respect to control `which`.
inline OperatorMatrix trotter_factor_gradient(const TrotterFactor& f, const PulseSchedule& s, int j, std::size_t which,
                                              double dt) {
  require(!f.diagonal && which < f.controls.size(), "factor has no control channel " + std::to_string(which));
  const DenseMatrix& hc = f.controls[which].second;
  return OperatorMatrix::dense(cplx(0.0, -dt) * hc * f.local_unitary(s, j, dt));
}

/// Exact derivative of the same local block (eigenbasis divided differences).
inline DenseMatrix exact_factor_derivative(const TrotterFactor& f, const PulseSchedule& s, int j, std::size_t which,
                                           double dt) {
  require(!f.diagonal && which < f.controls.size(), "factor has no control channel " + std::to_string(which));
  return HermitianExponential(f.local_hamiltonian(s, j), dt).derivative(f.controls[which].second);
}

/// Reference propagation by a Taylor series of exp(-i tau H_j) acting on k.
/// H_j = diag + sum_i (B_x^(i) sigma_x^(i) + B_y^(i) sigma_y^(i)) / 2 is applied
/// as a diagonal scaling plus one pair update per site.
class ExactStepper {
 public:
  explicit ExactStepper(const ModelConfig& model) : n_(model.n) {
    model.validate();
    diag_ = realize(static_hamiltonian(model)).diagonal_entries().real();
    for (int i = 1; i <= n_; ++i) rows_.push_back(model.control == ControlMode::global ? 0 : i - 1);
  }

  int n() const { return n_; }

  SparseMatrix hamiltonian(const PulseSchedule& s, int j) const {
    PauliTermSum c(n_);
    for (int i = 1; i <= n_; ++i) {
      const int row = rows_[static_cast<std::size_t>(i - 1)];
      c.add(PauliString::single(n_, i, Axis::x, 0.5 * s.bx(row, j)));
      c.add(PauliString::single(n_, i, Axis::y, 0.5 * s.by(row, j)));
    }
    SparseMatrix h = realize(c).to_sparse();
    for (Eigen::Index r = 0; r < h.rows(); ++r) h.coeffRef(r, r) += diag_[r];
    return h;
  }

  void apply(const PulseSchedule& s, int j, DenseMatrix& k) const {
    require(k.rows() == diag_.size(), "reference step: dimension mismatch");
    std::vector<cplx> down(static_cast<std::size_t>(n_)), up(static_cast<std::size_t>(n_));
    double norm = diag_.cwiseAbs().maxCoeff();
    for (int i = 0; i < n_; ++i) {
      const int row = rows_[static_cast<std::size_t>(i)];
      const double bx = s.bx(row, j), by = s.by(row, j);
      down[static_cast<std::size_t>(i)] = cplx(0.5 * bx, 0.5 * by);  // <d|h|u>
      up[static_cast<std::size_t>(i)] = cplx(0.5 * bx, -0.5 * by);   // <u|h|d>
      norm += 0.5 * std::hypot(bx, by);
    }
    const int sub = std::max(1, static_cast<int>(std::ceil(s.tau * norm / 0.5)));
    const double dt = s.tau / sub;
    const double x = dt * norm;
    int terms = 0;
    for (double bound = 1.0; bound > 1e-17 && terms < 40;) bound *= x / ++terms;
    DenseMatrix term(k.rows(), k.cols()), next(k.rows(), k.cols());
    for (int q = 0; q < sub; ++q) {
      term = k;
      for (int p = 1; p <= terms; ++p) {
        apply_hamiltonian(down, up, term, next);
        const cplx scale(0.0, -dt / p);
        term = scale * next;
        k += term;
      }
    }
  }

 private:
  static void fma(cplx& acc, cplx a, cplx b) {
    acc = cplx(acc.real() + a.real() * b.real() - a.imag() * b.imag(),
               acc.imag() + a.real() * b.imag() + a.imag() * b.real());
  }

  void apply_hamiltonian(const std::vector<cplx>& down, const std::vector<cplx>& up, const DenseMatrix& in,
                         DenseMatrix& out) const {
    const auto d = static_cast<std::size_t>(in.rows());
    out.array() = in.array().colwise() * diag_.array().cast<cplx>();
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
      const cplx* t = in.col(c).data();
      cplx* o = out.col(c).data();
      for (int i = 0; i < n_; ++i) {
        const std::size_t m = site_mask(n_, i + 1);
        const cplx cd = down[static_cast<std::size_t>(i)], cu = up[static_cast<std::size_t>(i)];
        for (std::size_t base = 0; base < d; base += 2 * m)
          for (std::size_t r0 = base; r0 < base + m; ++r0) {
            fma(o[r0 + m], cd, t[r0]);
            fma(o[r0], cu, t[r0 + m]);
          }
      }
    }
  }

  int n_;
  Eigen::VectorXd diag_;
  std::vector<int> rows_;
};

/// B_x^(i) = a cos(B_z t + 2 pi i / n), B_y^(i) = a sin(...), at step midpoints.
inline PulseSchedule benchmark_controls(int n, double bz, int steps, double tau, double amplitude = 0.05) {
  PulseSchedule s(n, steps, tau);
  for (int i = 1; i <= n; ++i)
    for (int j = 0; j < steps; ++j) {
      const double phase = bz * s.time(j) + 2.0 * std::numbers::pi * i / n;
      s.bx(i - 1, j) = amplitude * std::cos(phase);
      s.by(i - 1, j) = amplitude * std::sin(phase);
    }
  return s;
}

struct FidelityPoint {
  int step = 0;
  double time = 0.0;
  double fidelity = 1.0;
};

struct FidelityRun {
  std::vector<FidelityPoint> points;
  double min_fidelity = 1.0;
  double final_fidelity = 1.0;
  double trotter_ms = 0.0;
  double exact_ms = 0.0;
};

/// Tracks K_LTS and K_ori step by step; F is checked after every step and
/// recorded every `record_every` steps (and at the last one). With threads > 1
/// the two accumulators advance concurrently.
inline FidelityRun trotter_fidelity(const TrotterPlan& plan, const ExactStepper& exact, const PulseSchedule& s,
                                    int record_every = 1, int threads = 1) {
  s.validate();
  require(plan.n == exact.n(), "plan and reference act on different registers");
  require(std::abs(plan.tau - s.tau) <= 1e-15 * std::max(1.0, s.tau), "plan and schedule step durations differ");
  require(record_every >= 1, "record interval must be positive");
  const auto d = static_cast<Eigen::Index>(hilbert_dim(plan.n));
  DenseMatrix k_lts = DenseMatrix::Identity(d, d), k_ori = DenseMatrix::Identity(d, d);
  FidelityRun run;
  using clock = std::chrono::steady_clock;
  auto timed = [](auto&& fn) {
    const auto t0 = clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  for (int j = 0; j < s.steps(); ++j) {
    auto lts = [&] { apply_trotter_step(plan, s, j, k_lts); };
    auto ori = [&] { exact.apply(s, j, k_ori); };
    if (threads > 1) {
      auto pending = std::async(std::launch::async, [&] { return timed(ori); });
      run.trotter_ms += timed(lts);
      run.exact_ms += pending.get();
    } else {
      run.trotter_ms += timed(lts);
      run.exact_ms += timed(ori);
    }
    const double f = unitary_fidelity(k_lts, k_ori);
    if (!std::isfinite(f)) throw NumericalError("fidelity is not finite at step " + std::to_string(j));
    run.min_fidelity = std::min(run.min_fidelity, f);
    run.final_fidelity = f;
    if ((j + 1) % record_every == 0 || j + 1 == s.steps()) run.points.push_back({j + 1, (j + 1) * s.tau, f});
  }
  return run;
}

inline void write_fidelity_csv(std::ostream& os, const FidelityRun& run) {
  os << "step,time,fidelity\n";
  char buf[96];
  for (const auto& p : run.points) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", p.step, p.time, p.fidelity);
    os << buf;
  }
}

/// Least-squares slope of log(1 - F) against log(tau).
inline double loglog_slope(const std::vector<double>& taus, const std::vector<double>& deficits) {
  require(taus.size() == deficits.size() && taus.size() >= 2, "slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    require(taus[i] > 0.0 && deficits[i] > 0.0, "slope needs positive step sizes and deficits");
    const double x = std::log(taus[i]), y = std::log(deficits[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace symqoc
