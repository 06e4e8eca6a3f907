#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "symqoc/pauli.hpp"

using namespace symqoc;

TEST(EmbedSingle, SingleQubitZ) {
  const auto m = embed_single(1, 1, Axis::z);
  EXPECT_EQ(m.storage(), Storage::diagonal);
  EXPECT_EQ(m.coeff(0, 0), cplx(1.0));
  EXPECT_EQ(m.coeff(1, 1), cplx(-1.0));
}

TEST(EmbedSingle, SecondSiteXOfTwo) {
  const DenseMatrix m = embed_single(2, 2, Axis::x).to_dense();
  DenseMatrix expect = DenseMatrix::Zero(4, 4);
  expect(0, 1) = expect(1, 0) = expect(2, 3) = expect(3, 2) = 1.0;
  EXPECT_EQ(m, expect);
}

TEST(EmbedSingle, MiddleSpinDown) {
  const auto m = embed_single(3, 2, Axis::z);
  const auto idx = fock_index("udu");
  EXPECT_EQ(m.coeff(idx, idx), cplx(-1.0));
}

TEST(EmbedSingle, MatchesKroneckerOracle) {
  for (int n = 1; n <= 5; ++n)
    for (int i = 1; i <= n; ++i)
      for (Axis a : {Axis::x, Axis::y, Axis::z}) {
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(i - 1)] = axis_letter(a);
        EXPECT_EQ(oracle::max_abs(embed_single(n, i, a).to_dense() - oracle::kron_string(s)), 0.0);
      }
}

TEST(EmbedSingle, Errors) {
  EXPECT_THROW(embed_single(3, 0, Axis::x), ValidationError);
  EXPECT_THROW(embed_single(3, 4, Axis::x), ValidationError);
  EXPECT_THROW(embed_single(15, 1, Axis::x), ValidationError);
  EXPECT_THROW(embed_single(0, 1, Axis::x), ValidationError);
}

TEST(EmbedPairZZ, Wraparound) {
  EXPECT_EQ(pair_zz(3, 3, 1).letters(), "ZIZ");
  EXPECT_EQ(oracle::max_abs(embed_pair_zz(3, 3, 1).to_dense() - oracle::kron_string("ZIZ")), 0.0);
  EXPECT_EQ(embed_pair_zz(3, 3, 1).storage(), Storage::diagonal);
}

TEST(EmbedPairZZ, Eigenvalues) {
  const auto a = embed_pair_zz(2, 1, 1);
  EXPECT_EQ(a.coeff(fock_index("uu"), fock_index("uu")), cplx(1.0));
  const auto b = embed_pair_zz(4, 1, 2);
  EXPECT_EQ(b.coeff(fock_index("udud"), fock_index("udud")), cplx(1.0));
}

TEST(EmbedPairZZ, RejectsLargeOffset) {
  EXPECT_THROW(embed_pair_zz(3, 1, 3), ValidationError);
  EXPECT_THROW(embed_pair_zz(3, 1, 0), ValidationError);
}

TEST(Realize, FieldSumTwoQubits) {
  PauliTermSum hz(2, {PauliString("ZI"), PauliString("IZ")});
  const auto m = realize(hz);
  EXPECT_EQ(m.storage(), Storage::diagonal);
  Eigen::VectorXcd expect(4);
  expect << 2, 0, 0, -2;
  EXPECT_EQ(m.diagonal_entries(), expect);
}

TEST(Realize, SixQubitXSparsity) {
  PauliTermSum hx(6);
  for (int i = 1; i <= 6; ++i) hx.add(PauliString::single(6, i, Axis::x));
  const auto m = realize(hx);
  EXPECT_EQ(m.storage(), Storage::sparse);
  EXPECT_EQ(m.nonzeros(), 6 * 64);
  const SparseMatrix s = m.to_sparse();
  for (std::uint32_t r = 0; r < 64; ++r) {
    int ones = 0;
    for (std::uint32_t c = 0; c < 64; ++c) {
      const bool single_flip = std::popcount(r ^ c) == 1;
      const cplx v = s.coeff(r, c);
      EXPECT_EQ(v, single_flip ? cplx(1.0) : cplx(0.0));
      ones += single_flip;
    }
    EXPECT_EQ(ones, 6);
  }
}

TEST(Realize, EmptyIsZero) {
  const auto m = realize(PauliTermSum(3));
  EXPECT_EQ(m.dim(), 8);
  EXPECT_EQ(m.nonzeros(), 0);
  EXPECT_EQ(m.storage(), Storage::diagonal);
}

TEST(Realize, SumEqualsSumOfTerms) {
  std::mt19937_64 rng(7);
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    PauliTermSum sum(n);
    oracle::Mat expect = oracle::Mat::Zero(1 << n, 1 << n);
    for (int t = 0; t < 5; ++t) {
      std::string s;
      for (int i = 0; i < n; ++i) s += letters[pick(rng)];
      const double c = g(rng);
      sum.add(PauliString(s, c));
      expect += c * oracle::kron_string(s);
    }
    const auto m = realize(sum);
    EXPECT_TRUE(m.hermitian());
    EXPECT_LE(m.hermiticity_deviation(), 1e-12);
    EXPECT_LE(oracle::max_abs(m.to_dense() - expect), 1e-12);
  }
}

TEST(Realize, StorageThresholds) {
  PauliTermSum hx3(3);
  for (int i = 1; i <= 3; ++i) hx3.add(PauliString::single(3, i, Axis::x));
  EXPECT_EQ(realize(hx3).storage(), Storage::dense);  // 3/8 fill
}

TEST(PauliBasis, TwoQubitCompleteness) {
  const char letters[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> strings;
  for (char a : letters)
    for (char b : letters) strings.push_back(std::string{a, b});
  for (const auto& a : strings)
    for (const auto& b : strings) {
      const cplx tr = (realize(PauliString(a)).to_dense().adjoint() * realize(PauliString(b)).to_dense()).trace();
      EXPECT_NEAR(std::abs(tr - cplx(a == b ? 4.0 : 0.0)), 0.0, 1e-14);
    }
  std::mt19937_64 rng(11);
  const oracle::Mat h = oracle::random_hermitian(4, rng);
  PauliTermSum expansion(2);
  for (const auto& s : strings) {
    const cplx c = (realize(PauliString(s)).to_dense() * h).trace() / 4.0;
    EXPECT_NEAR(c.imag(), 0.0, 1e-12);
    expansion.add(PauliString(s, c.real()));
  }
  EXPECT_LE(oracle::max_abs(realize(expansion).to_dense() - h), 1e-12);
}

TEST(PauliTermSum, MergeCombinesEqualStrings) {
  PauliTermSum s(2, {PauliString("ZI", 1.0), PauliString("IZ", 2.0), PauliString("ZI", 0.5)});
  const auto m = s.merged();
  ASSERT_EQ(m.terms().size(), 2u);
  EXPECT_EQ(m.terms()[0], PauliString("ZI", 1.5));
  EXPECT_THROW(s.add(PauliString("ZZZ")), ValidationError);
}

TEST(OperatorMatrix, CertifyRejectsNonHermitian) {
  DenseMatrix d(2, 2);
  d << 0, 1, 0, 0;
  auto m = OperatorMatrix::dense(d);
  EXPECT_THROW(m.certify_hermitian(), NumericalError);
}

TEST(Coordinate, RoundTrip) {
  PauliTermSum h(3, {PauliString("XYZ", 0.1), PauliString("ZZI", 1.0 / 3.0)});
  const auto m = realize(h);
  std::stringstream ss;
  write_coordinate(ss, m);
  const auto back = read_coordinate(ss);
  EXPECT_EQ(oracle::max_abs(back.to_dense() - m.to_dense()), 0.0);
}

TEST(Coordinate, HeaderAndOrder) {
  std::stringstream ss;
  write_coordinate(ss, embed_single(1, 1, Axis::y));
  EXPECT_EQ(ss.str(), "2 2\n0 1 0 -1\n1 0 0 1\n");
}

TEST(Coordinate, MalformedInput) {
  std::stringstream bad("2\n");
  EXPECT_THROW(read_coordinate(bad), ValidationError);
  std::stringstream trunc("2 2\n0 1 0 -1\n");
  EXPECT_THROW(read_coordinate(trunc), ValidationError);
  std::stringstream range("2 1\n5 0 1 0\n");
  EXPECT_THROW(read_coordinate(range), ValidationError);
}

TEST(Fock, LabelRoundTrip) {
  EXPECT_EQ(fock_index("uud"), 1u);
  EXPECT_EQ(fock_label(3, 4), "duu");
  EXPECT_EQ(fock_index(fock_label(5, 19)), 19u);
  EXPECT_THROW(fock_index("uxd"), ValidationError);
}
