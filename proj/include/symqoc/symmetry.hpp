#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "symqoc/pauli.hpp"

namespace symqoc {

enum class GroupKind { symmetric, dihedral };

inline const char* group_name(GroupKind g) { return g == GroupKind::symmetric ? "sn" : "dn"; }

inline GroupKind parse_group(const std::string& s) {
  if (s == "sn" || s == "Sn" || s == "S_n") return GroupKind::symmetric;
  if (s == "dn" || s == "Dn" || s == "D_n") return GroupKind::dihedral;
  throw ValidationError("unknown group '" + s + "' (expected sn or dn)");
}

inline constexpr int kMaxSymmetricEnumeration = 8;

/// A permutation of qubit slots. perm[i] is the slot (0-based) that the
/// qubit at slot i is moved to.
struct GroupElement {
  enum class Tag { rotation, reflection, permutation };

  std::vector<int> perm;
  Tag tag = Tag::permutation;
  int m = 0;  ///< rotation power for dihedral tags

  int n() const { return static_cast<int>(perm.size()); }

  bool is_identity() const {
    for (int i = 0; i < n(); ++i)
      if (perm[static_cast<std::size_t>(i)] != i) return false;
    return true;
  }

  std::string name() const {
    switch (tag) {
      case Tag::rotation: return "r^" + std::to_string(m);
      case Tag::reflection: return "s*r^" + std::to_string(m);
      default: {
        std::string s = "[";
        for (int i = 0; i < n(); ++i) s += (i ? " " : "") + std::to_string(perm[static_cast<std::size_t>(i)] + 1);
        return s + "]";
      }
    }
  }
};

inline bool is_bijection(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size()) || seen[static_cast<std::size_t>(p)]) return false;
    seen[static_cast<std::size_t>(p)] = true;
  }
  return true;
}

/// Function composition a∘b (b acts first).
inline GroupElement compose(const GroupElement& a, const GroupElement& b) {
  require(a.n() == b.n(), "composing elements of different degree");
  GroupElement c;
  c.perm.resize(b.perm.size());
  for (std::size_t i = 0; i < b.perm.size(); ++i) c.perm[i] = a.perm[static_cast<std::size_t>(b.perm[i])];
  return c;
}

/// Fock index after moving the qubit at slot i to slot perm[i].
inline std::uint32_t act_on_index(const GroupElement& e, std::uint32_t index) {
  const int n = e.n();
  std::uint32_t out = 0;
  for (int i = 0; i < n; ++i)
    if (index & (std::uint32_t{1} << (n - 1 - i))) out |= std::uint32_t{1} << (n - 1 - e.perm[static_cast<std::size_t>(i)]);
  return out;
}

inline std::vector<std::uint32_t> index_map(const GroupElement& e) {
  const auto dim = static_cast<std::uint32_t>(hilbert_dim(e.n()));
  std::vector<std::uint32_t> map(dim);
  for (std::uint32_t b = 0; b < dim; ++b) map[b] = act_on_index(e, b);
  return map;
}

/// 0/1 matrix M(e) with M(e)|b> = |e·b>.
inline OperatorMatrix index_permutation_matrix(const GroupElement& e) {
  check_qubit_count(e.n());
  require(is_bijection(e.perm), "group element is not a bijection");
  const auto map = index_map(e);
  std::vector<Triplet> t;
  t.reserve(map.size());
  for (std::uint32_t b = 0; b < map.size(); ++b) t.emplace_back(map[b], b, 1.0);
  SparseMatrix s(static_cast<Eigen::Index>(map.size()), static_cast<Eigen::Index>(map.size()));
  s.setFromTriplets(t.begin(), t.end());
  return OperatorMatrix::sparse(std::move(s));
}

inline GroupElement rotation(int n, int m) {
  GroupElement e{std::vector<int>(static_cast<std::size_t>(n)), GroupElement::Tag::rotation, m};
  for (int i = 0; i < n; ++i) e.perm[static_cast<std::size_t>(i)] = (i + m) % n;
  return e;
}

/// s∘r^m where s reverses the ring.
inline GroupElement reflection(int n, int m) {
  GroupElement e{std::vector<int>(static_cast<std::size_t>(n)), GroupElement::Tag::reflection, m};
  for (int i = 0; i < n; ++i) e.perm[static_cast<std::size_t>(i)] = (n - 1) - (i + m) % n;
  return e;
}

inline GroupElement adjacent_transposition(int n, int k) {
  GroupElement e;
  e.perm.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) e.perm[static_cast<std::size_t>(i)] = i;
  std::swap(e.perm[static_cast<std::size_t>(k)], e.perm[static_cast<std::size_t>(k + 1)]);
  return e;
}

/// D_n: rotations r^0..r^{n-1} then reflections s r^0..s r^{n-1}.
/// S_n: lexicographic permutation order. Identity first in both.
inline std::vector<GroupElement> enumerate_group(GroupKind group, int n) {
  check_qubit_count(n);
  std::vector<GroupElement> out;
  if (group == GroupKind::dihedral) {
    require(n >= 3, "D_n requires n >= 3");
    for (int m = 0; m < n; ++m) out.push_back(rotation(n, m));
    for (int m = 0; m < n; ++m) out.push_back(reflection(n, m));
    return out;
  }
  require(n <= kMaxSymmetricEnumeration,
          "S_n enumeration limited to n <= " + std::to_string(kMaxSymmetricEnumeration));
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  do {
    out.push_back(GroupElement{p, GroupElement::Tag::permutation, 0});
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Young's orthogonal form for S_n

struct YoungShape {
  std::vector<int> partition;
  /// cells[t][k] = (row, col) of number k in standard tableau t.
  std::vector<std::vector<std::pair<int, int>>> cells;
  std::map<std::vector<std::pair<int, int>>, int> lookup;

  int dim() const { return static_cast<int>(cells.size()); }
  int content(int t, int k) const {
    const auto& [r, c] = cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    return c - r;
  }
};

inline void partitions_rec(int remaining, int max_part, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions_rec(remaining - p, p, cur, out);
    cur.pop_back();
  }
}

/// Partitions of n, reverse lexicographic: (n), (n-1,1), ...
inline std::vector<std::vector<int>> partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  partitions_rec(n, n, cur, out);
  return out;
}

inline YoungShape young_shape(const std::vector<int>& partition) {
  YoungShape shape{partition, {}, {}};
  int n = 0;
  for (int p : partition) n += p;
  std::vector<int> filled(partition.size(), 0);
  std::vector<std::pair<int, int>> cur;
  // Place numbers 0..n-1 one at a time; row order gives Yamanouchi-word order.
  auto rec = [&](auto&& self, int k) -> void {
    if (k == n) {
      shape.lookup[cur] = static_cast<int>(shape.cells.size());
      shape.cells.push_back(cur);
      return;
    }
    for (std::size_t r = 0; r < partition.size(); ++r) {
      const int c = filled[r];
      if (c >= partition[r]) continue;
      if (r > 0 && filled[r - 1] <= c) continue;
      filled[r] += 1;
      cur.emplace_back(static_cast<int>(r), c);
      self(self, k + 1);
      cur.pop_back();
      filled[r] -= 1;
    }
  };
  rec(rec, 0);
  return shape;
}

/// Orthogonal matrix of the adjacent transposition swapping numbers k, k+1.
inline Eigen::MatrixXd young_transposition(const YoungShape& shape, int k) {
  const int d = shape.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int t = 0; t < d; ++t) {
    const int r = shape.content(t, k + 1) - shape.content(t, k);
    m(t, t) = 1.0 / r;
    if (r != 1 && r != -1) {
      auto swapped = shape.cells[static_cast<std::size_t>(t)];
      std::swap(swapped[static_cast<std::size_t>(k)], swapped[static_cast<std::size_t>(k + 1)]);
      const int partner = shape.lookup.at(swapped);
      m(partner, t) = std::sqrt(1.0 - 1.0 / (static_cast<double>(r) * r));
    }
  }
  return m;
}

/// Adjacent-transposition word with e = s_{w[last]} ∘ ... ∘ s_{w[0]}.
inline std::vector<int> reduced_word(GroupElement e) {
  std::vector<int> word;
  for (bool changed = true; changed;) {
    changed = false;
    for (int k = 0; k + 1 < e.n(); ++k) {
      if (e.perm[static_cast<std::size_t>(k)] > e.perm[static_cast<std::size_t>(k + 1)]) {
        std::swap(e.perm[static_cast<std::size_t>(k)], e.perm[static_cast<std::size_t>(k + 1)]);
        word.push_back(k);
        changed = true;
      }
    }
  }
  return word;
}

// ---------------------------------------------------------------------------
// Irrep tables

struct Irrep {
  std::string label;
  int dim = 1;
};

/// Diagonal entries A_jj(e) of every unitary irrep over every element.
struct IrrepTable {
  GroupKind group = GroupKind::dihedral;
  int n = 0;
  std::vector<GroupElement> elements;
  std::vector<Irrep> irreps;
  /// diagonals[irrep][element][j]
  std::vector<std::vector<std::vector<double>>> diagonals;
  /// Young data, S_n only (parallel to irreps).
  std::vector<YoungShape> shapes;

  std::size_t order() const { return elements.size(); }

  std::size_t irrep_index(const std::string& label) const {
    for (std::size_t i = 0; i < irreps.size(); ++i)
      if (irreps[i].label == label) return i;
    throw ValidationError("unknown irrep label '" + label + "'");
  }

  std::size_t element_index(const GroupElement& e) const {
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (elements[i].perm == e.perm) return i;
    throw ValidationError("element " + e.name() + " not in group");
  }

  int sum_of_squared_dims() const {
    int s = 0;
    for (const auto& ir : irreps) s += ir.dim * ir.dim;
    return s;
  }

  /// Text dump, one line per (irrep, element): `label, dim, element, d_1 .. d_dim`.
  std::string dump() const {
    std::ostringstream os;
    char buf[64];
    for (std::size_t i = 0; i < irreps.size(); ++i)
      for (std::size_t e = 0; e < elements.size(); ++e) {
        os << irreps[i].label << ", " << irreps[i].dim << ", " << elements[e].name() << ",";
        for (double v : diagonals[i][e]) {
          std::snprintf(buf, sizeof buf, " %.17g", v == 0.0 ? 0.0 : v);
          os << buf;
        }
        os << '\n';
      }
    return os.str();
  }
};

inline int dihedral_two_dim_count(int n) { return (n - 1) / 2; }

/// Full dihedral irrep matrix for a tagged element (rotation / reflection).
/// Order: A1, A2, [B1, B2 for even n], E1..E_k.
inline Eigen::MatrixXd dihedral_irrep_matrix(int n, std::size_t irrep, const GroupElement& e) {
  const bool refl = e.tag == GroupElement::Tag::reflection;
  require(e.tag != GroupElement::Tag::permutation, "dihedral irrep needs a tagged element");
  const double parity = (e.m % 2 == 0) ? 1.0 : -1.0;
  const std::size_t one_dim = (n % 2 == 0) ? 4 : 2;
  Eigen::MatrixXd m(1, 1);
  if (irrep < one_dim) {
    switch (irrep) {
      case 0: m(0, 0) = 1.0; break;
      case 1: m(0, 0) = refl ? -1.0 : 1.0; break;
      case 2: m(0, 0) = parity; break;
      default: m(0, 0) = refl ? -parity : parity; break;
    }
    return m;
  }
  const int k = static_cast<int>(irrep - one_dim) + 1;
  const double phi = 2.0 * std::numbers::pi * k * e.m / n;
  Eigen::Matrix2d rot;
  rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  if (refl) rot.row(1) *= -1.0;  // diag(1,-1) * R
  return rot;
}

/// Full irrep matrix of any element of the table's group.
inline Eigen::MatrixXd irrep_matrix(const IrrepTable& table, std::size_t irrep, const GroupElement& e) {
  if (table.group == GroupKind::dihedral)
    return dihedral_irrep_matrix(table.n, irrep, table.elements[table.element_index(e)]);
  const auto& shape = table.shapes[irrep];
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(shape.dim(), shape.dim());
  const auto word = reduced_word(e);
  for (auto it = word.rbegin(); it != word.rend(); ++it) m = m * young_transposition(shape, *it);
  return m;
}

/// Generator matrices: D_n -> {r, s}; S_n -> adjacent transpositions.
inline std::vector<Eigen::MatrixXd> generator_matrices(const IrrepTable& table, std::size_t irrep) {
  std::vector<Eigen::MatrixXd> out;
  if (table.group == GroupKind::dihedral) {
    out.push_back(dihedral_irrep_matrix(table.n, irrep, rotation(table.n, 1)));
    out.push_back(dihedral_irrep_matrix(table.n, irrep, reflection(table.n, 0)));
  } else {
    for (int k = 0; k + 1 < table.n; ++k) out.push_back(young_transposition(table.shapes[irrep], k));
  }
  return out;
}

namespace detail {

inline IrrepTable dihedral_table(int n) {
  IrrepTable t;
  t.group = GroupKind::dihedral;
  t.n = n;
  t.elements = enumerate_group(GroupKind::dihedral, n);
  t.irreps.push_back({"A1", 1});
  t.irreps.push_back({"A2", 1});
  if (n % 2 == 0) {
    t.irreps.push_back({"B1", 1});
    t.irreps.push_back({"B2", 1});
  }
  for (int k = 1; k <= dihedral_two_dim_count(n); ++k) t.irreps.push_back({"E" + std::to_string(k), 2});
  t.diagonals.resize(t.irreps.size());
  for (std::size_t i = 0; i < t.irreps.size(); ++i)
    for (const auto& e : t.elements) {
      const auto m = dihedral_irrep_matrix(n, i, e);
      std::vector<double> d(static_cast<std::size_t>(m.rows()));
      for (Eigen::Index j = 0; j < m.rows(); ++j) d[static_cast<std::size_t>(j)] = m(j, j);
      t.diagonals[i].push_back(std::move(d));
    }
  return t;
}

// Walks S_n as S_{m-1}·(s_{m-2}∘...∘s_k) cosets so that each element costs a
// single sparse column update per irrep.
inline IrrepTable symmetric_table(int n) {
  require(n <= kMaxSymmetricEnumeration,
          "S_n irrep tables limited to n <= " + std::to_string(kMaxSymmetricEnumeration));
  IrrepTable t;
  t.group = GroupKind::symmetric;
  t.n = n;
  for (const auto& p : partitions(n)) {
    t.shapes.push_back(young_shape(p));
    std::string label = "[";
    for (std::size_t i = 0; i < p.size(); ++i) label += (i ? "," : "") + std::to_string(p[i]);
    t.irreps.push_back({label + "]", t.shapes.back().dim()});
  }
  const std::size_t nirr = t.irreps.size();
  t.diagonals.resize(nirr);

  // per irrep, per k: transposition as (diag, partner, offdiag) columns
  struct Sparse2 {
    std::vector<double> diag, off;
    std::vector<int> partner;
  };
  std::vector<std::vector<Sparse2>> gens(nirr);
  for (std::size_t i = 0; i < nirr; ++i)
    for (int k = 0; k + 1 < n; ++k) {
      const auto m = young_transposition(t.shapes[i], k);
      Sparse2 s;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        s.diag.push_back(m(c, c));
        int partner = -1;
        double off = 0.0;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          if (r != c && m(r, c) != 0.0) {
            partner = static_cast<int>(r);
            off = m(r, c);
          }
        s.partner.push_back(partner);
        s.off.push_back(off);
      }
      gens[i].push_back(std::move(s));
    }

  using Mats = std::vector<Eigen::MatrixXd>;
  auto times_transposition = [&](const Mats& in, int k) {
    Mats out = in;
    for (std::size_t i = 0; i < nirr; ++i) {
      const auto& g = gens[i][static_cast<std::size_t>(k)];
      for (Eigen::Index c = 0; c < in[i].cols(); ++c) {
        out[i].col(c) = in[i].col(c) * g.diag[static_cast<std::size_t>(c)];
        const int p = g.partner[static_cast<std::size_t>(c)];
        if (p >= 0) out[i].col(c) += in[i].col(p) * g.off[static_cast<std::size_t>(c)];
      }
    }
    return out;
  };

  auto record = [&](const GroupElement& w, const Mats& mats) {
    t.elements.push_back(w);
    for (std::size_t i = 0; i < nirr; ++i) {
      std::vector<double> d(static_cast<std::size_t>(mats[i].rows()));
      for (Eigen::Index j = 0; j < mats[i].rows(); ++j) d[static_cast<std::size_t>(j)] = mats[i](j, j);
      t.diagonals[i].push_back(std::move(d));
    }
  };

  auto visit = [&](auto&& self, int m, const GroupElement& w, const Mats& mats) -> void {
    if (m > n) {
      record(w, mats);
      return;
    }
    self(self, m + 1, w, mats);
    GroupElement cur = w;
    Mats cm = mats;
    for (int k = m - 2; k >= 0; --k) {
      std::swap(cur.perm[static_cast<std::size_t>(k)], cur.perm[static_cast<std::size_t>(k + 1)]);
      cm = times_transposition(cm, k);
      self(self, m + 1, cur, cm);
    }
  };

  GroupElement id;
  for (int i = 0; i < n; ++i) id.perm.push_back(i);
  Mats start;
  for (const auto& s : t.shapes) start.push_back(Eigen::MatrixXd::Identity(s.dim(), s.dim()));
  visit(visit, 2, id, start);
  return t;
}

}  // namespace detail

/// Irrep table: D_n via closed-form real irreps; S_n via Young's orthogonal form (n <= 8).
inline IrrepTable build_irrep_table(GroupKind group, int n) {
  check_qubit_count(n);
  if (group == GroupKind::dihedral) {
    require(n >= 3, "D_n requires n >= 3");
    return detail::dihedral_table(n);
  }
  return detail::symmetric_table(n);
}

/// Matrix-element projector P = (d/|G|) Σ_e conj(A_jj(e)) M(e).
struct ProjectorOperator {
  GroupKind group;
  std::string irrep;
  int index;  ///< diagonal index j (0-based)
  OperatorMatrix matrix;
};

/// Weights (d/|G|)·A_jj(e) for every element, in table order.
inline std::vector<double> projector_weights(const IrrepTable& table, std::size_t irrep, int j) {
  const int d = table.irreps[irrep].dim;
  require(j >= 0 && j < d, "diagonal index " + std::to_string(j) + " outside irrep of dimension " + std::to_string(d));
  std::vector<double> w(table.order());
  const double scale = static_cast<double>(d) / static_cast<double>(table.order());
  for (std::size_t e = 0; e < table.order(); ++e) w[e] = scale * table.diagonals[irrep][e][static_cast<std::size_t>(j)];
  return w;
}

inline ProjectorOperator build_projector(const IrrepTable& table, const std::string& label, int j) {
  const std::size_t irrep = table.irrep_index(label);
  const auto w = projector_weights(table, irrep, j);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(table.n));
  std::vector<Triplet> trip;
  trip.reserve(table.order() * static_cast<std::size_t>(dim));
  for (std::size_t e = 0; e < table.order(); ++e) {
    if (w[e] == 0.0) continue;
    for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(dim); ++b)
      trip.emplace_back(act_on_index(table.elements[e], b), b, w[e]);
  }
  SparseMatrix p(dim, dim);
  p.setFromTriplets(trip.begin(), trip.end());
  p.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) > 1e-15; });
  OperatorMatrix m = OperatorMatrix::sparse(std::move(p));
  m.certify_hermitian();
  return {table.group, label, j, std::move(m)};
}

/// Every (irrep, j) projector, table irrep order then ascending j.
inline std::vector<ProjectorOperator> build_all_projectors(const IrrepTable& table) {
  std::vector<ProjectorOperator> out;
  for (const auto& ir : table.irreps)
    for (int j = 0; j < ir.dim; ++j) out.push_back(build_projector(table, ir.label, j));
  return out;
}

}  // namespace symqoc
