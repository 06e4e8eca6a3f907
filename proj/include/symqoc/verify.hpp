#pragma once

#include <array>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "symqoc/adjoint.hpp"
#include "symqoc/model.hpp"

namespace symqoc {

inline constexpr double kBlockTol = 1e-10;
inline constexpr double kProjectorTol = 1e-10;
inline constexpr double kIsometryTol = 1e-12;
inline constexpr int kMaxProjectorD = 6;
inline constexpr int kMaxProjectorS = 5;

/// Published first-block dimension of the dihedral trivial sector, n = 1..14.
inline int expected_bracelet_dim(int n) {
  static constexpr std::array<int, 14> dims{2, 3, 4, 6, 8, 13, 18, 30, 46, 78, 126, 224, 380, 687};
  check_qubit_count(n);
  return dims[static_cast<std::size_t>(n - 1)];
}

inline int expected_first_block_dim(int n, GroupKind g) {
  return g == GroupKind::symmetric ? n + 1 : expected_bracelet_dim(n);
}

struct VerifyCheck {
  std::string name;
  int n = 0;
  GroupKind group = GroupKind::symmetric;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
  }
  int failures() const {
    return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const VerifyCheck& c) { return !c.pass; }));
  }
};

struct ProjectorLawResiduals {
  double idempotent = 0.0;
  double orthogonal = 0.0;
  double complete = 0.0;
};

inline ProjectorLawResiduals projector_laws(GroupKind g, int n) {
  const auto table = build_irrep_table(g, n);
  const auto ps = build_all_projectors(table);
  std::vector<SparseMatrix> m;
  for (const auto& p : ps) m.push_back(p.matrix.to_sparse());
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n));
  ProjectorLawResiduals r;
  SparseMatrix sum(d, d);
  for (std::size_t a = 0; a < m.size(); ++a) {
    r.idempotent = std::max(r.idempotent, max_abs(SparseMatrix(m[a] * m[a]) - m[a]));
    for (std::size_t b = a + 1; b < m.size(); ++b) r.orthogonal = std::max(r.orthogonal, max_abs(SparseMatrix(m[a] * m[b])));
    sum += m[a];
  }
  SparseMatrix id(d, d);
  id.setIdentity();
  r.complete = max_abs(sum - id);
  return r;
}

inline bool full_adjoint_supported(int n, GroupKind g) {
  return n <= (g == GroupKind::symmetric ? kMaxFullAdjointS : kMaxFullAdjointD);
}

/// Adjoint, block and projector invariants for every (n, group).
inline VerifyReport verify_suite(const std::vector<int>& ns, const std::vector<GroupKind>& groups) {
  VerifyReport rep;
  auto add = [&](std::string name, int n, GroupKind g, double residual, double tol, bool pass) {
    rep.checks.push_back({std::move(name), n, g, residual, tol, pass});
  };
  for (int n : ns) {
    check_qubit_count(n);
    for (GroupKind g : groups) {
      const auto first = build_first_block(n, g);
      const int want = expected_first_block_dim(n, g);
      add("first_block_dim", n, g, std::abs(static_cast<double>(first.cols() - want)), 0.0, first.cols() == want);
      const double iso = first.isometry_deviation();
      add("first_block_isometry", n, g, iso, kIsometryTol, iso <= kIsometryTol);

      if (full_adjoint_supported(n, g)) {
        const auto full = build_full_adjoint(n, g);
        const double fiso = full.isometry_deviation();
        add("full_adjoint_unitary", n, g, fiso, kIsometryTol, fiso <= kIsometryTol);
        add("full_first_block_size", n, g, std::abs(static_cast<double>(full.blocks.first() - want)), 0.0,
            full.blocks.first() == want);
        for (Axis ax : {Axis::x, Axis::y, Axis::z}) {
          const auto r = verify_block_structure(transform(realize(field_sum(n, ax, 1.0)), full), full.blocks, kBlockTol);
          add(std::string("block_diagonal_H") + static_cast<char>(std::tolower(axis_letter(ax))), n, g, r.max_off_block,
              kBlockTol, r.pass);
        }
        if (g == GroupKind::dihedral && n >= 2) {
          std::vector<double> c(static_cast<std::size_t>(n / 2), 1.0);
          const auto r = verify_block_structure(transform(realize(coupling_sum(n, c)), full), full.blocks, kBlockTol);
          add("block_diagonal_Hcpl", n, g, r.max_off_block, kBlockTol, r.pass);
        }
        if (full.blocks.sizes.size() > 1) {
          const auto r = verify_block_structure(realize(field_sum(n, Axis::x, 1.0)), full.blocks, kBlockTol);
          add("untransformed_Hx_rejected", n, g, r.max_off_block, kBlockTol, !r.pass);
        }
      }

      const int limit = g == GroupKind::symmetric ? kMaxProjectorS : kMaxProjectorD;
      if (n >= 2 && n <= limit) {
        const auto laws = projector_laws(g, n);
        add("projector_idempotent", n, g, laws.idempotent, kProjectorTol, laws.idempotent <= kProjectorTol);
        add("projector_orthogonal", n, g, laws.orthogonal, kProjectorTol, laws.orthogonal <= kProjectorTol);
        add("projector_complete", n, g, laws.complete, kProjectorTol, laws.complete <= kProjectorTol);
      }
    }
  }
  return rep;
}

inline void write_verify_report(std::ostream& os, const VerifyReport& r) {
  char buf[200];
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, "%s n=%d group=%s %s residual=%.3e tol=%.1e\n", c.pass ? "PASS" : "FAIL", c.n,
                  group_name(c.group), c.name.c_str(), c.residual, c.tolerance);
    os << buf;
  }
}

}  // namespace symqoc
