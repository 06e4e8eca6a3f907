#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "symqoc/pauli.hpp"
#include "symqoc/symmetry.hpp"

namespace symqoc {

enum class AdjointMode { full, first_block };

inline const char* mode_name(AdjointMode m) { return m == AdjointMode::full ? "full" : "first-block"; }

inline AdjointMode parse_mode(const std::string& s) {
  if (s == "full") return AdjointMode::full;
  if (s == "first-block" || s == "first_block" || s == "first") return AdjointMode::first_block;
  throw ValidationError("unknown adjoint mode '" + s + "' (expected full or first-block)");
}

inline constexpr int kMaxFullAdjointS = 12;
inline constexpr int kMaxFullAdjointD = 10;

struct BlockStructure {
  std::vector<int> sizes;
  std::vector<std::string> block_labels;
  std::vector<std::string> first_block_basis_labels;

  int total() const { return std::accumulate(sizes.begin(), sizes.end(), 0); }
  int first() const { return sizes.empty() ? 0 : sizes.front(); }

  /// Block id of every row/column index.
  std::vector<int> owner() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(total()));
    for (std::size_t b = 0; b < sizes.size(); ++b) out.insert(out.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
    return out;
  }

  /// Structured-text sidecar: one `block index size label` line per block.
  std::string to_text() const {
    std::string s = "blocks " + std::to_string(sizes.size()) + "\n";
    for (std::size_t b = 0; b < sizes.size(); ++b)
      s += std::to_string(b) + " " + std::to_string(sizes[b]) + " " + (b < block_labels.size() ? block_labels[b] : "-") + "\n";
    s += "first_block_basis";
    for (const auto& l : first_block_basis_labels) s += " " + l;
    return s + "\n";
  }
};

/// Columns are the orthonormal symmetry-adapted basis (2^n rows).
struct AdjointMatrix {
  int n = 0;
  GroupKind group = GroupKind::symmetric;
  AdjointMode mode = AdjointMode::full;
  SparseMatrix matrix;
  BlockStructure blocks;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }

  /// A^dagger A - I, max abs.
  double isometry_deviation() const {
    SparseMatrix g = SparseMatrix(matrix.adjoint()) * matrix;
    SparseMatrix id(g.rows(), g.cols());
    id.setIdentity();
    return max_abs(g - id);
  }

  /// Coordinates A^dagger psi.
  DenseVector coordinates(const DenseVector& psi) const {
    require(psi.size() == rows(), "state dimension does not match adjoint rows");
    return matrix.adjoint() * psi;
  }

  /// Embeds block coordinates back into the full space.
  DenseVector embed(const DenseVector& coords) const {
    require(coords.size() == cols(), "coordinate dimension does not match adjoint columns");
    return matrix * coords;
  }

  /// First-block restriction of a full adjoint.
  AdjointMatrix first_block() const {
    AdjointMatrix out = *this;
    out.mode = AdjointMode::first_block;
    const int d1 = blocks.first();
    out.matrix = SparseMatrix(matrix.leftCols(d1));
    out.blocks.sizes = {d1};
    out.blocks.block_labels.resize(std::min<std::size_t>(1, blocks.block_labels.size()));
    return out;
  }
};

namespace detail {

using SparseColumn = std::vector<std::pair<std::uint32_t, double>>;

inline SparseMatrix assemble_columns(int n, const std::vector<SparseColumn>& columns) {
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (const auto& [r, v] : columns[c]) t.emplace_back(r, static_cast<Eigen::Index>(c), v);
  SparseMatrix s(static_cast<Eigen::Index>(hilbert_dim(n)), static_cast<Eigen::Index>(columns.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Symmetric (Dicke) sector: column M is the uniform superposition of all
/// Fock states with M down spins.
inline AdjointMatrix build_dicke_first_block(int n) {
  check_qubit_count(n);
  std::vector<detail::SparseColumn> cols(static_cast<std::size_t>(n + 1));
  for (std::uint32_t b = 0; b < hilbert_dim(n); ++b) {
    const int m = std::popcount(b);
    cols[static_cast<std::size_t>(m)].emplace_back(b, 1.0 / std::sqrt(detail::binomial(n, m)));
  }
  AdjointMatrix a;
  a.n = n;
  a.group = GroupKind::symmetric;
  a.mode = AdjointMode::first_block;
  a.matrix = detail::assemble_columns(n, cols);
  a.blocks.sizes = {n + 1};
  a.blocks.block_labels = {"J=" + std::to_string(n) + "/2"};
  for (int m = 0; m <= n; ++m) a.blocks.first_block_basis_labels.push_back("M" + std::to_string(m));
  return a;
}

/// D_n orbit of a Fock index together with its canonical (minimum) member.
struct Bracelet {
  std::uint32_t representative = 0;
  int weight = 0;
  std::vector<std::uint32_t> members;  ///< ascending
};

/// All binary bracelets of length n, ordered by weight then representative.
inline std::vector<Bracelet> enumerate_bracelets(int n) {
  check_qubit_count(n);
  require(n >= 3, "bracelet enumeration requires n >= 3");
  const auto group = enumerate_group(GroupKind::dihedral, n);
  std::vector<Bracelet> out;
  const auto dim = static_cast<std::uint32_t>(hilbert_dim(n));
  for (std::uint32_t b = 0; b < dim; ++b) {
    std::vector<std::uint32_t> images;
    images.reserve(group.size());
    bool canonical = true;
    for (const auto& e : group) {
      const auto img = act_on_index(e, b);
      if (img < b) {
        canonical = false;
        break;
      }
      images.push_back(img);
    }
    if (!canonical) continue;
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());
    out.push_back({b, std::popcount(b), std::move(images)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Bracelet& a, const Bracelet& b) {
    return std::tie(a.weight, a.representative) < std::tie(b.weight, b.representative);
  });
  return out;
}

/// Trivial-irrep D_n sector: one uniform orbit superposition per bracelet.
inline AdjointMatrix build_bracelet_first_block(int n) {
  const auto bracelets = enumerate_bracelets(n);
  std::vector<detail::SparseColumn> cols;
  AdjointMatrix a;
  for (const auto& br : bracelets) {
    const double w = 1.0 / std::sqrt(static_cast<double>(br.members.size()));
    detail::SparseColumn c;
    for (auto m : br.members) c.emplace_back(m, w);
    cols.push_back(std::move(c));
    a.blocks.first_block_basis_labels.push_back(fock_label(n, br.representative));
  }
  a.n = n;
  a.group = GroupKind::dihedral;
  a.mode = AdjointMode::first_block;
  a.matrix = detail::assemble_columns(n, cols);
  a.blocks.sizes = {static_cast<int>(cols.size())};
  a.blocks.block_labels = {"A1 j=0"};
  return a;
}

inline AdjointMatrix build_first_block(int n, GroupKind group) {
  return group == GroupKind::symmetric ? build_dicke_first_block(n) : build_bracelet_first_block(n);
}

namespace detail {

struct Multiplet {
  int two_j = 0;
  std::vector<int> path;             ///< 2j after each coupling step
  std::vector<SparseColumn> states;  ///< 2M = two_j, two_j-2, ..., -two_j
};

inline const SparseColumn* multiplet_state(const Multiplet& m, int two_m) {
  if (two_m > m.two_j || two_m < -m.two_j) return nullptr;
  return &m.states[static_cast<std::size_t>((m.two_j - two_m) / 2)];
}

inline void add_scaled_with_site(SparseColumn& out, const SparseColumn* in, double coef, std::uint32_t bit) {
  if (in == nullptr || coef == 0.0) return;
  for (const auto& [idx, v] : *in) out.emplace_back((idx << 1) | bit, coef * v);
}

// Couples one more spin-1/2 (appended as the least significant site).
inline std::vector<Multiplet> couple_spin_half(const std::vector<Multiplet>& prev) {
  std::vector<Multiplet> next;
  for (const auto& m : prev) {
    const int tj = m.two_j;
    for (int tjn : {tj + 1, tj - 1}) {
      if (tjn < 0) continue;
      Multiplet out{tjn, m.path, {}};
      out.path.push_back(tjn);
      for (int tm = tjn; tm >= -tjn; tm -= 2) {
        SparseColumn col;
        const double up = std::sqrt((tj + tm + 1) / (2.0 * (tj + 1)));
        const double down = std::sqrt((tj - tm + 1) / (2.0 * (tj + 1)));
        if (tjn == tj + 1) {
          add_scaled_with_site(col, multiplet_state(m, tm - 1), up, 0);
          add_scaled_with_site(col, multiplet_state(m, tm + 1), down, 1);
        } else {
          add_scaled_with_site(col, multiplet_state(m, tm - 1), -down, 0);
          add_scaled_with_site(col, multiplet_state(m, tm + 1), up, 1);
        }
        std::sort(col.begin(), col.end());
        out.states.push_back(std::move(col));
      }
      next.push_back(std::move(out));
    }
  }
  return next;
}

inline std::string half_integer(int twice) {
  return twice % 2 == 0 ? std::to_string(twice / 2) : std::to_string(twice) + "/2";
}

inline AdjointMatrix full_adjoint_symmetric(int n) {
  require(n <= kMaxFullAdjointS, "full S_n adjoint limited to n <= " + std::to_string(kMaxFullAdjointS));
  std::vector<Multiplet> mult{{1, {1}, {{{0u, 1.0}}, {{1u, 1.0}}}}};
  for (int k = 2; k <= n; ++k) mult = couple_spin_half(mult);
  std::stable_sort(mult.begin(), mult.end(), [](const Multiplet& a, const Multiplet& b) {
    if (a.two_j != b.two_j) return a.two_j > b.two_j;
    return a.path > b.path;
  });
  AdjointMatrix a;
  a.n = n;
  a.group = GroupKind::symmetric;
  a.mode = AdjointMode::full;
  std::vector<SparseColumn> cols;
  for (const auto& m : mult) {
    a.blocks.sizes.push_back(static_cast<int>(m.states.size()));
    std::string label = "J=" + half_integer(m.two_j) + " path=";
    for (std::size_t i = 0; i < m.path.size(); ++i) label += (i ? "," : "") + half_integer(m.path[i]);
    a.blocks.block_labels.push_back(std::move(label));
    for (const auto& s : m.states) cols.push_back(s);
  }
  for (int m = 0; m <= n; ++m) a.blocks.first_block_basis_labels.push_back("M" + std::to_string(m));
  a.matrix = assemble_columns(n, cols);
  return a;
}

// Projects every orbit member with P_{theta,j}; orbits are invariant under
// the group so Gram-Schmidt only runs within an orbit.
inline AdjointMatrix full_adjoint_dihedral(int n) {
  require(n >= 3 && n <= kMaxFullAdjointD,
          "full D_n adjoint requires 3 <= n <= " + std::to_string(kMaxFullAdjointD));
  constexpr double kRankTol = 1e-8;
  const auto table = build_irrep_table(GroupKind::dihedral, n);
  const auto bracelets = enumerate_bracelets(n);
  AdjointMatrix a;
  a.n = n;
  a.group = GroupKind::dihedral;
  a.mode = AdjointMode::full;
  std::vector<SparseColumn> cols;

  for (std::size_t irrep = 0; irrep < table.irreps.size(); ++irrep) {
    for (int j = 0; j < table.irreps[irrep].dim; ++j) {
      const auto weights = projector_weights(table, irrep, j);
      int block = 0;
      for (const auto& br : bracelets) {
        const auto& members = br.members;
        std::map<std::uint32_t, Eigen::Index> local;
        for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = static_cast<Eigen::Index>(k);
        std::vector<Eigen::VectorXd> accepted;
        for (auto b : members) {
          Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(members.size()));
          for (std::size_t e = 0; e < table.order(); ++e) v[local.at(act_on_index(table.elements[e], b))] += weights[e];
          if (v.norm() <= kRankTol) continue;
          for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : accepted) v -= q.dot(v) * q;
          const double norm = v.norm();
          if (norm <= kRankTol) continue;
          accepted.push_back(v / norm);
        }
        for (const auto& q : accepted) {
          SparseColumn c;
          for (std::size_t k = 0; k < members.size(); ++k)
            if (q[static_cast<Eigen::Index>(k)] != 0.0) c.emplace_back(members[k], q[static_cast<Eigen::Index>(k)]);
          cols.push_back(std::move(c));
          if (irrep == 0) a.blocks.first_block_basis_labels.push_back(fock_label(n, br.representative));
        }
        block += static_cast<int>(accepted.size());
      }
      if (block > 0) {
        a.blocks.sizes.push_back(block);
        a.blocks.block_labels.push_back(table.irreps[irrep].label + " j=" + std::to_string(j));
      }
    }
  }
  if (static_cast<std::size_t>(a.blocks.total()) != hilbert_dim(n))
    throw NumericalError("D_n adjoint rank deficiency: " + std::to_string(a.blocks.total()) + " of " +
                         std::to_string(hilbert_dim(n)) + " columns");
  a.matrix = assemble_columns(n, cols);
  return a;
}

}  // namespace detail

/// Complete symmetry-adapted unitary; S_n by spin coupling, D_n by projectors.
inline AdjointMatrix build_full_adjoint(int n, GroupKind group) {
  check_qubit_count(n);
  return group == GroupKind::symmetric ? detail::full_adjoint_symmetric(n) : detail::full_adjoint_dihedral(n);
}

inline AdjointMatrix build_adjoint(int n, GroupKind group, AdjointMode mode) {
  return mode == AdjointMode::full ? build_full_adjoint(n, group) : build_first_block(n, group);
}

/// A^dagger H A, Hermitian-symmetrized; the d1 x d1 compression in first-block mode.
inline OperatorMatrix transform(const OperatorMatrix& h, const AdjointMatrix& a) {
  require(h.dim() == a.rows(), "transform: operator dimension " + std::to_string(h.dim()) +
                                   " does not match adjoint rows " + std::to_string(a.rows()));
  const SparseMatrix ad = a.matrix.adjoint();
  SparseMatrix m;
  if (h.storage() == Storage::dense) {
    DenseMatrix dm = ad * (h.to_dense() * a.matrix);
    m = dm.sparseView(cplx(0.0), 0.0);
  } else {
    m = ad * (h.to_sparse() * a.matrix);
  }
  SparseMatrix sym = (m + SparseMatrix(m.adjoint())) * cplx(0.5);
  OperatorMatrix out = OperatorMatrix::automatic(std::move(sym));
  if (h.hermitian()) out.certify_hermitian();
  return out;
}

/// Dense compression used by first-block backends.
inline DenseMatrix compress(const OperatorMatrix& h, const AdjointMatrix& a) { return transform(h, a).to_dense(); }

struct BlockReport {
  double max_off_block = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

inline BlockReport verify_block_structure(const OperatorMatrix& m, const BlockStructure& blocks, double tol) {
  require(blocks.total() == m.dim(), "block sizes sum to " + std::to_string(blocks.total()) +
                                         " but matrix dimension is " + std::to_string(m.dim()));
  const auto owner = blocks.owner();
  BlockReport r{0.0, tol, true};
  if (m.storage() != Storage::diagonal) {
    const SparseMatrix s = m.to_sparse();
    for (Eigen::Index c = 0; c < s.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(s, c); it; ++it)
        if (owner[static_cast<std::size_t>(it.row())] != owner[static_cast<std::size_t>(it.col())])
          r.max_off_block = std::max(r.max_off_block, std::abs(it.value()));
  }
  r.pass = r.max_off_block <= tol;
  return r;
}

}  // namespace symqoc
