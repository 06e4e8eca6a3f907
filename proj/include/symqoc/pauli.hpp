#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <variant>
#include <vector>

#include "symqoc/error.hpp"

namespace symqoc {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr int kMaxQubits = 14;

inline void check_qubit_count(int n) {
  require(n >= 1 && n <= kMaxQubits,
          "qubit count " + std::to_string(n) + " outside supported range [1, " +
              std::to_string(kMaxQubits) + "]");
}

/// Hilbert-space dimension 2^n.
inline std::size_t hilbert_dim(int n) { return std::size_t{1} << n; }

/// Bit mask of site i (1-based) in a Fock index. Site 1 is the most
/// significant bit; bit value 0 is spin up.
inline std::uint32_t site_mask(int n, int site) {
  return std::uint32_t{1} << (n - site);
}

/// Spin-z eigenvalue (+1 up, -1 down) of `site` in Fock state `index`.
inline int spin_z(int n, std::uint32_t index, int site) {
  return (index & site_mask(n, site)) ? -1 : +1;
}

/// Fock index from a pattern string of u/d (or 0/1) characters, site 1 first.
inline std::uint32_t fock_index(const std::string& pattern) {
  std::uint32_t index = 0;
  for (char c : pattern) {
    index <<= 1;
    if (c == 'd' || c == '1') {
      index |= 1;
    } else {
      require(c == 'u' || c == '0', "invalid Fock pattern character '" + std::string(1, c) + "'");
    }
  }
  return index;
}

inline std::string fock_label(int n, std::uint32_t index) {
  std::string s(static_cast<std::size_t>(n), 'u');
  for (int site = 1; site <= n; ++site)
    if (index & site_mask(n, site)) s[static_cast<std::size_t>(site - 1)] = 'd';
  return s;
}

enum class Axis { x, y, z };

inline char axis_letter(Axis a) { return a == Axis::x ? 'X' : (a == Axis::y ? 'Y' : 'Z'); }

/// Weighted tensor product of Pauli letters over n qubits.
class PauliString {
 public:
  PauliString(std::string letters, double coefficient = 1.0)
      : letters_(std::move(letters)), coefficient_(coefficient) {
    check_qubit_count(static_cast<int>(letters_.size()));
    for (char c : letters_)
      require(c == 'I' || c == 'X' || c == 'Y' || c == 'Z',
              "invalid Pauli letter '" + std::string(1, c) + "'");
  }

  /// Single letter `axis` at `site` (1-based), identity elsewhere.
  static PauliString single(int n, int site, Axis axis, double coefficient = 1.0) {
    check_qubit_count(n);
    require(site >= 1 && site <= n, "site index " + std::to_string(site) + " out of range");
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(site - 1)] = axis_letter(axis);
    return PauliString(std::move(s), coefficient);
  }

  int n() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  char letter(int site) const { return letters_[static_cast<std::size_t>(site - 1)]; }
  double coefficient() const { return coefficient_; }

  bool is_diagonal() const {
    return std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == 'I' || c == 'Z'; });
  }

  /// Sites (1-based) carrying a non-identity letter.
  std::vector<int> support() const {
    std::vector<int> s;
    for (int i = 1; i <= n(); ++i)
      if (letter(i) != 'I') s.push_back(i);
    return s;
  }

  /// X/Y letters flip bits; this is the XOR mask applied to a column index.
  std::uint32_t flip_mask() const {
    std::uint32_t m = 0;
    for (int i = 1; i <= n(); ++i)
      if (letter(i) == 'X' || letter(i) == 'Y') m |= site_mask(n(), i);
    return m;
  }

  /// Matrix element <col ^ flip_mask | P | col> including the coefficient.
  cplx column_value(std::uint32_t col) const {
    cplx phase = coefficient_;
    for (int i = 1; i <= n(); ++i) {
      const bool down = (col & site_mask(n(), i)) != 0;
      switch (letter(i)) {
        case 'Z':
          if (down) phase = -phase;
          break;
        case 'Y':
          phase *= down ? cplx(0, -1) : cplx(0, 1);
          break;
        default:
          break;
      }
    }
    return phase;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::string letters_;
  double coefficient_;
};

/// Sum of Pauli strings over a common qubit count.
class PauliTermSum {
 public:
  explicit PauliTermSum(int n) : n_(n) { check_qubit_count(n); }
  PauliTermSum(int n, std::vector<PauliString> terms) : PauliTermSum(n) {
    for (auto& t : terms) add(std::move(t));
  }

  void add(PauliString term) {
    require(term.n() == n_, "Pauli term has " + std::to_string(term.n()) +
                                " qubits, sum expects " + std::to_string(n_));
    terms_.push_back(std::move(term));
  }
  void append(const PauliTermSum& other) {
    for (const auto& t : other.terms()) add(t);
  }

  int n() const { return n_; }
  const std::vector<PauliString>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  bool is_diagonal() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.is_diagonal(); });
  }

  /// Identical letter strings combined, first-occurrence order kept.
  PauliTermSum merged() const {
    PauliTermSum out(n_);
    for (const auto& t : terms_) {
      auto it = std::find_if(out.terms_.begin(), out.terms_.end(),
                             [&](const PauliString& o) { return o.letters() == t.letters(); });
      if (it == out.terms_.end())
        out.terms_.push_back(t);
      else
        *it = PauliString(it->letters(), it->coefficient() + t.coefficient());
    }
    return out;
  }

  PauliTermSum scaled(double factor) const {
    PauliTermSum out(n_);
    for (const auto& t : terms_) out.terms_.emplace_back(t.letters(), t.coefficient() * factor);
    return out;
  }

  friend bool operator==(const PauliTermSum&, const PauliTermSum&) = default;

 private:
  int n_;
  std::vector<PauliString> terms_;
};

enum class Storage { dense, diagonal, sparse };

inline const char* storage_name(Storage s) {
  switch (s) {
    case Storage::dense: return "dense";
    case Storage::diagonal: return "diagonal";
    case Storage::sparse: return "sparse";
  }
  return "?";
}

/// Square complex matrix with an explicit storage kind.
class OperatorMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kSparseFill = 0.10;

  static OperatorMatrix zero(Eigen::Index dim) { return diagonal(DenseVector::Zero(dim)); }
  static OperatorMatrix identity(Eigen::Index dim) { return diagonal(DenseVector::Ones(dim)); }
  static OperatorMatrix diagonal(DenseVector d) { return OperatorMatrix(std::move(d)); }
  static OperatorMatrix sparse(SparseMatrix s) {
    require(s.rows() == s.cols(), "operator matrix must be square");
    s.makeCompressed();
    return OperatorMatrix(std::move(s));
  }
  static OperatorMatrix dense(DenseMatrix d) {
    require(d.rows() == d.cols(), "operator matrix must be square");
    return OperatorMatrix(std::move(d));
  }

  /// Diagonal if no off-diagonal entry is stored, sparse if fill <= 10%,
  /// dense otherwise.
  static OperatorMatrix automatic(SparseMatrix s) {
    require(s.rows() == s.cols(), "operator matrix must be square");
    s.prune(cplx(0.0));
    bool diag_only = true;
    for (Eigen::Index c = 0; c < s.outerSize() && diag_only; ++c)
      for (SparseMatrix::InnerIterator it(s, c); it; ++it)
        if (it.row() != it.col()) {
          diag_only = false;
          break;
        }
    if (diag_only) return diagonal(DenseVector(s.diagonal()));
    const double fill = static_cast<double>(s.nonZeros()) /
                        (static_cast<double>(s.rows()) * static_cast<double>(s.cols()));
    if (fill <= kSparseFill) return sparse(std::move(s));
    return dense(DenseMatrix(s));
  }

  Eigen::Index dim() const {
    return std::visit([](const auto& m) -> Eigen::Index { return m.rows(); }, data_);
  }
  Storage storage() const {
    if (std::holds_alternative<DenseVector>(data_)) return Storage::diagonal;
    if (std::holds_alternative<SparseMatrix>(data_)) return Storage::sparse;
    return Storage::dense;
  }
  bool hermitian() const { return hermitian_; }

  const DenseVector& diagonal_entries() const {
    require(storage() == Storage::diagonal, "operator is not stored as diagonal");
    return std::get<DenseVector>(data_);
  }

  DenseMatrix to_dense() const {
    switch (storage()) {
      case Storage::diagonal: return std::get<DenseVector>(data_).asDiagonal();
      case Storage::sparse: return DenseMatrix(std::get<SparseMatrix>(data_));
      default: return std::get<DenseMatrix>(data_);
    }
  }
  SparseMatrix to_sparse() const {
    switch (storage()) {
      case Storage::diagonal: {
        const auto& d = std::get<DenseVector>(data_);
        SparseMatrix s(d.size(), d.size());
        std::vector<Triplet> t;
        for (Eigen::Index i = 0; i < d.size(); ++i)
          if (d[i] != cplx(0.0)) t.emplace_back(i, i, d[i]);
        s.setFromTriplets(t.begin(), t.end());
        return s;
      }
      case Storage::sparse: return std::get<SparseMatrix>(data_);
      default: return std::get<DenseMatrix>(data_).sparseView(cplx(0.0), 0.0);
    }
  }

  Eigen::Index nonzeros() const {
    switch (storage()) {
      case Storage::diagonal: return (std::get<DenseVector>(data_).array() != cplx(0.0)).count();
      case Storage::sparse: return std::get<SparseMatrix>(data_).nonZeros();
      default: return (std::get<DenseMatrix>(data_).array() != cplx(0.0)).count();
    }
  }

  cplx coeff(Eigen::Index r, Eigen::Index c) const {
    switch (storage()) {
      case Storage::diagonal: return r == c ? std::get<DenseVector>(data_)[r] : cplx(0.0);
      case Storage::sparse: return std::get<SparseMatrix>(data_).coeff(r, c);
      default: return std::get<DenseMatrix>(data_)(r, c);
    }
  }

  template <typename Derived>
  DenseMatrix apply(const Eigen::MatrixBase<Derived>& x) const {
    switch (storage()) {
      case Storage::diagonal: return std::get<DenseVector>(data_).asDiagonal() * x;
      case Storage::sparse: return std::get<SparseMatrix>(data_) * x;
      default: return std::get<DenseMatrix>(data_) * x;
    }
  }

  /// max |M - M^dagger| elementwise.
  double hermiticity_deviation() const {
    switch (storage()) {
      case Storage::diagonal:
        return std::get<DenseVector>(data_).imag().cwiseAbs().maxCoeff() * 2.0;
      case Storage::sparse: {
        const auto& s = std::get<SparseMatrix>(data_);
        SparseMatrix diff = s - SparseMatrix(s.adjoint());
        double m = 0.0;
        for (Eigen::Index c = 0; c < diff.outerSize(); ++c)
          for (SparseMatrix::InnerIterator it(diff, c); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
      }
      default: {
        const auto& d = std::get<DenseMatrix>(data_);
        return d.size() == 0 ? 0.0 : (d - d.adjoint()).cwiseAbs().maxCoeff();
      }
    }
  }

  /// Sets the Hermitian flag after certifying max deviation <= 1e-12.
  OperatorMatrix& certify_hermitian() {
    const double dev = hermiticity_deviation();
    if (!(dev <= kHermitianTol))
      throw NumericalError("matrix is not Hermitian (max deviation " + std::to_string(dev) + ")");
    hermitian_ = true;
    return *this;
  }

  OperatorMatrix adjoint() const {
    OperatorMatrix out = *this;
    std::visit(
        [](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DenseVector>)
            m = m.conjugate().eval();
          else
            m = T(m.adjoint());
        },
        out.data_);
    return out;
  }

  OperatorMatrix operator*(double s) const {
    OperatorMatrix out = *this;
    std::visit([s](auto& m) { m *= s; }, out.data_);
    return out;
  }

  /// Sum with storage re-selected for the result.
  OperatorMatrix operator+(const OperatorMatrix& o) const {
    require(dim() == o.dim(), "dimension mismatch in operator sum");
    if (storage() == Storage::diagonal && o.storage() == Storage::diagonal) {
      OperatorMatrix out = diagonal(diagonal_entries() + o.diagonal_entries());
      out.hermitian_ = hermitian_ && o.hermitian_;
      return out;
    }
    if (storage() == Storage::dense || o.storage() == Storage::dense) {
      OperatorMatrix out = dense(to_dense() + o.to_dense());
      out.hermitian_ = hermitian_ && o.hermitian_;
      return out;
    }
    OperatorMatrix out = automatic(to_sparse() + o.to_sparse());
    out.hermitian_ = hermitian_ && o.hermitian_;
    return out;
  }

 private:
  explicit OperatorMatrix(DenseVector d) : data_(std::move(d)) {}
  explicit OperatorMatrix(SparseMatrix s) : data_(std::move(s)) {}
  explicit OperatorMatrix(DenseMatrix d) : data_(std::move(d)) {}

  std::variant<DenseVector, SparseMatrix, DenseMatrix> data_;
  bool hermitian_ = false;
};

/// Triplets of one Pauli string, one per column.
inline void append_triplets(const PauliString& p, std::vector<Triplet>& out) {
  const std::uint32_t dim = static_cast<std::uint32_t>(hilbert_dim(p.n()));
  const std::uint32_t flip = p.flip_mask();
  for (std::uint32_t col = 0; col < dim; ++col) out.emplace_back(col ^ flip, col, p.column_value(col));
}

/// Concrete 2^n x 2^n matrix of a Pauli sum. Terms are summed in list order.
inline OperatorMatrix realize(const PauliTermSum& sum) {
  const int n = sum.n();
  check_qubit_count(n);
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(n));
  if (sum.is_diagonal()) {
    DenseVector d = DenseVector::Zero(dim);
    for (const auto& t : sum.terms())
      for (std::uint32_t col = 0; col < static_cast<std::uint32_t>(dim); ++col) d[col] += t.column_value(col);
    OperatorMatrix m = OperatorMatrix::diagonal(std::move(d));
    m.certify_hermitian();
    return m;
  }
  std::vector<Triplet> triplets;
  triplets.reserve(sum.terms().size() * static_cast<std::size_t>(dim));
  for (const auto& t : sum.terms()) append_triplets(t, triplets);
  SparseMatrix s(dim, dim);
  s.setFromTriplets(triplets.begin(), triplets.end());
  OperatorMatrix m = OperatorMatrix::automatic(std::move(s));
  m.certify_hermitian();
  return m;
}

inline OperatorMatrix realize(const PauliString& p) { return realize(PauliTermSum(p.n(), {p})); }

/// sigma_alpha at `site` embedded in n qubits.
inline OperatorMatrix embed_single(int n, int site, Axis alpha) {
  return realize(PauliString::single(n, site, alpha));
}

/// Site coupled to `site` at distance `offset` on the ring (1-based, wraps).
inline int ring_partner(int n, int site, int offset) { return (site - 1 + offset) % n + 1; }

/// sigma_z^(i) sigma_z^(i+offset) with periodic wrap.
inline PauliString pair_zz(int n, int site, int offset, double coefficient = 1.0) {
  check_qubit_count(n);
  require(site >= 1 && site <= n, "site index " + std::to_string(site) + " out of range");
  require(offset >= 1, "coupling offset must be positive");
  require(offset < n, "coupling offset " + std::to_string(offset) + " must be smaller than n");
  std::string s(static_cast<std::size_t>(n), 'I');
  s[static_cast<std::size_t>(site - 1)] = 'Z';
  s[static_cast<std::size_t>(ring_partner(n, site, offset) - 1)] = 'Z';
  return PauliString(std::move(s), coefficient);
}

inline OperatorMatrix embed_pair_zz(int n, int site, int offset) { return realize(pair_zz(n, site, offset)); }

/// Plain-text coordinate export: header `dim nnz` (square) or
/// `rows cols nnz`, then `row col re im`, 0-based, %.17g.
inline void write_coordinate(std::ostream& os, const SparseMatrix& m) {
  SparseMatrix s = m;
  s.prune(cplx(0.0));
  char buf[128];
  if (s.rows() == s.cols())
    std::snprintf(buf, sizeof buf, "%lld %lld\n", static_cast<long long>(s.rows()),
                  static_cast<long long>(s.nonZeros()));
  else
    std::snprintf(buf, sizeof buf, "%lld %lld %lld\n", static_cast<long long>(s.rows()),
                  static_cast<long long>(s.cols()), static_cast<long long>(s.nonZeros()));
  os << buf;
  // row-major order for readability
  std::vector<std::tuple<Eigen::Index, Eigen::Index, cplx>> entries;
  entries.reserve(static_cast<std::size_t>(s.nonZeros()));
  for (Eigen::Index c = 0; c < s.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  for (const auto& [r, c, v] : entries) {
    std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n", static_cast<long long>(r),
                  static_cast<long long>(c), v.real(), v.imag());
    os << buf;
  }
}

inline void write_coordinate(std::ostream& os, const OperatorMatrix& m) { write_coordinate(os, m.to_sparse()); }

inline SparseMatrix read_coordinate_sparse(std::istream& is) {
  std::string header;
  require(static_cast<bool>(std::getline(is, header)), "coordinate file: missing header");
  std::istringstream hs(header);
  std::vector<long long> fields;
  for (long long v; hs >> v;) fields.push_back(v);
  require(fields.size() == 2 || fields.size() == 3, "coordinate file: malformed header '" + header + "'");
  const long long rows = fields[0];
  const long long cols = fields.size() == 3 ? fields[1] : fields[0];
  const long long nnz = fields.back();
  require(rows >= 0 && cols >= 0 && nnz >= 0, "coordinate file: negative header field");
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long r, c;
    double re, im;
    require(static_cast<bool>(is >> r >> c >> re >> im), "coordinate file: truncated entry list");
    require(r >= 0 && r < rows && c >= 0 && c < cols, "coordinate file: index out of range");
    t.emplace_back(r, c, cplx(re, im));
  }
  SparseMatrix s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

inline OperatorMatrix read_coordinate(std::istream& is) { return OperatorMatrix::automatic(read_coordinate_sparse(is)); }

/// max |A B - B A| elementwise.
inline double commutator_norm(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix c = a * b - b * a;
  double m = 0.0;
  for (Eigen::Index k = 0; k < c.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(c, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline double max_abs(const SparseMatrix& s) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace symqoc
