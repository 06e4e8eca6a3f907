#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "symqoc/verify.hpp"

using namespace symqoc;

namespace {

// Brute-force orbit count of binary necklaces under rotation and reflection.
int bracelets(int n) {
  std::set<unsigned> reps;
  const unsigned mask = (1u << n) - 1u;
  for (unsigned x = 0; x <= mask; ++x) {
    unsigned best = x;
    for (int flip = 0; flip < 2; ++flip) {
      unsigned y = x;
      if (flip) {
        y = 0;
        for (int b = 0; b < n; ++b)
          if (x >> b & 1u) y |= 1u << (n - 1 - b);
      }
      for (int r = 0; r < n; ++r) {
        best = std::min(best, y);
        y = ((y << 1) | (y >> (n - 1))) & mask;
      }
    }
    reps.insert(best);
  }
  return static_cast<int>(reps.size());
}

}  // namespace

TEST(ExpectedDims, BraceletTableMatchesBruteForce) {
  for (int n = 1; n <= 14; ++n) EXPECT_EQ(expected_bracelet_dim(n), bracelets(n)) << "n=" << n;
}

TEST(ExpectedDims, SymmetricGroupIsNPlusOne) {
  for (int n = 1; n <= 14; ++n) EXPECT_EQ(expected_first_block_dim(n, GroupKind::symmetric), n + 1);
}

TEST(ProjectorLaws, SmallGroupsAreExact) {
  for (int n = 3; n <= 5; ++n)
    for (GroupKind g : {GroupKind::symmetric, GroupKind::dihedral}) {
      const auto r = projector_laws(g, n);
      EXPECT_LT(r.idempotent, kProjectorTol);
      EXPECT_LT(r.orthogonal, kProjectorTol);
      EXPECT_LT(r.complete, kProjectorTol);
    }
}

TEST(VerifySuite, PassesForSmallRings) {
  const auto r = verify_suite({3, 4, 5}, {GroupKind::symmetric, GroupKind::dihedral});
  EXPECT_TRUE(r.pass());
  EXPECT_GT(r.checks.size(), 20u);
  std::ostringstream os;
  write_verify_report(os, r);
  EXPECT_EQ(os.str().find("FAIL"), std::string::npos);
}

TEST(VerifySuite, GuardsRange) { EXPECT_THROW(verify_suite({20}, {GroupKind::dihedral}), ValidationError); }
