#include "ueq/intlinalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <numeric>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

std::int64_t add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw IntegerOverflow("integer matrix arithmetic");
  return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw IntegerOverflow("integer matrix arithmetic");
  return r;
}

std::int64_t abs_checked(std::int64_t a) {
  if (a == std::numeric_limits<std::int64_t>::min()) throw IntegerOverflow("integer abs");
  return a < 0 ? -a : a;
}

std::int64_t dot(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s = add(s, mul(a[i], b[i]));
  return s;
}

// Nearest integer to num/den, den > 0.
std::int64_t round_div(std::int64_t num, std::int64_t den) {
  const std::int64_t twice = mul(2, num);
  std::int64_t q = twice / (2 * den);
  const std::int64_t rem = twice - q * 2 * den;
  if (rem > den) ++q;
  if (rem < -den) --q;
  return q;
}

// Pairwise Gauss reduction: shortens basis vectors by unimodular moves so
// that printed monomials stay small. Never changes the lattice.
void size_reduce(std::vector<IntVector>& basis) {
  bool improved = true;
  for (int pass = 0; improved && pass < 1000; ++pass) {
    improved = false;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = 0; j < basis.size(); ++j) {
        if (i == j) continue;
        const std::int64_t nj = dot(basis[j], basis[j]);
        const std::int64_t q = round_div(dot(basis[i], basis[j]), nj);
        if (q == 0) continue;
        IntVector cand = basis[i];
        for (std::size_t t = 0; t < cand.size(); ++t) cand[t] = add(cand[t], mul(-q, basis[j][t]));
        if (dot(cand, cand) < dot(basis[i], basis[i])) {
          basis[i] = std::move(cand);
          improved = true;
        }
      }
    }
  }
}

// Smith normal form machinery, generic over checked int64 and cpp_int.

using Big = boost::multiprecision::cpp_int;

Big add(const Big& a, const Big& b) { return a + b; }
Big mul(const Big& a, const Big& b) { return a * b; }
Big magnitude(const Big& a) { return abs(a); }
std::int64_t magnitude(std::int64_t a) { return abs_checked(a); }

template <class Int>
struct Dense {
  std::size_t rows = 0, cols = 0;
  std::vector<Int> a;

  Dense(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, Int(0)) {}
  static Dense identity(std::size_t n) {
    Dense m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Int(1);
    return m;
  }
  Int& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  const Int& operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  Dense transposed() const {
    Dense t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
  }
};

template <class Int>
struct Snf {
  Dense<Int> S, D, T;
  std::size_t rank = 0;
};

// (row_i, row_j) <- (x row_i + y row_j, u row_i + v row_j)
template <class Int>
void combine_rows(Dense<Int>& m, std::size_t i, std::size_t j, const Int& x, const Int& y, const Int& u,
                  const Int& v) {
  for (std::size_t c = 0; c < m.cols; ++c) {
    const Int a = m(i, c), b = m(j, c);
    m(i, c) = add(mul(x, a), mul(y, b));
    m(j, c) = add(mul(u, a), mul(v, b));
  }
}

template <class Int>
void combine_cols(Dense<Int>& m, std::size_t i, std::size_t j, const Int& x, const Int& y, const Int& u,
                  const Int& v) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const Int a = m(r, i), b = m(r, j);
    m(r, i) = add(mul(x, a), mul(y, b));
    m(r, j) = add(mul(u, a), mul(v, b));
  }
}

template <class Int>
void swap_rows(Dense<Int>& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < m.cols; ++c) std::swap(m(a, c), m(b, c));
}

template <class Int>
void swap_cols(Dense<Int>& m, std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t r = 0; r < m.rows; ++r) std::swap(m(r, a), m(r, b));
}

// g = gcd(a, b) >= 0 with x a + y b = g.
template <class Int>
Int ext_gcd(Int a, Int b, Int& x, Int& y) {
  Int x0(1), y0(0), x1(0), y1(1);
  while (b != 0) {
    const Int q = a / b;
    Int r = add(a, mul(Int(-q), b));
    a = b;
    b = r;
    Int nx = add(x0, mul(Int(-q), x1));
    Int ny = add(y0, mul(Int(-q), y1));
    x0 = x1;
    y0 = y1;
    x1 = nx;
    y1 = ny;
  }
  if (a < 0) {
    a = -a;
    x0 = -x0;
    y0 = -y0;
  }
  x = x0;
  y = y0;
  return a;
}

// Clears row/column entries against the pivot (t, t). A divisible entry is
// removed by one subtraction; otherwise a unimodular 2x2 step built from the
// extended gcd replaces the pivot by the gcd.
template <class Int>
bool clear_column(Snf<Int>& f, std::size_t t) {
  bool changed = false;
  for (std::size_t i = t + 1; i < f.D.rows; ++i) {
    const Int e = f.D(i, t);
    if (e == 0) continue;
    changed = true;
    const Int p = f.D(t, t);
    if (e % p == 0) {
      const Int q = -(e / p);
      combine_rows(f.D, t, i, Int(1), Int(0), q, Int(1));
      combine_rows(f.S, t, i, Int(1), Int(0), q, Int(1));
    } else {
      Int x, y;
      const Int g = ext_gcd(p, e, x, y);
      const Int u = -(e / g), v = p / g;
      combine_rows(f.D, t, i, x, y, u, v);
      combine_rows(f.S, t, i, x, y, u, v);
    }
  }
  return changed;
}

template <class Int>
bool clear_row(Snf<Int>& f, std::size_t t) {
  bool changed = false;
  for (std::size_t j = t + 1; j < f.D.cols; ++j) {
    const Int e = f.D(t, j);
    if (e == 0) continue;
    changed = true;
    const Int p = f.D(t, t);
    if (e % p == 0) {
      const Int q = -(e / p);
      combine_cols(f.D, t, j, Int(1), Int(0), q, Int(1));
      combine_cols(f.T, t, j, Int(1), Int(0), q, Int(1));
    } else {
      Int x, y;
      const Int g = ext_gcd(p, e, x, y);
      const Int u = -(e / g), v = p / g;
      combine_cols(f.D, t, j, x, y, u, v);
      combine_cols(f.T, t, j, x, y, u, v);
    }
  }
  return changed;
}

template <class Int>
Snf<Int> snf_core(Dense<Int> a) {
  const std::size_t r = a.rows, c = a.cols;
  Snf<Int> f{Dense<Int>::identity(r), std::move(a), Dense<Int>::identity(c), 0};
  std::size_t t = 0;
  for (; t < std::min(r, c); ++t) {
    // Pivot: smallest nonzero magnitude in the trailing block.
    std::size_t pi = r, pj = c;
    Int best(0);
    for (std::size_t i = t; i < r; ++i) {
      for (std::size_t j = t; j < c; ++j) {
        const Int v = magnitude(f.D(i, j));
        if (v != 0 && (best == 0 || v < best)) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    }
    if (best == 0) break;
    swap_rows(f.D, t, pi);
    swap_rows(f.S, t, pi);
    swap_cols(f.D, t, pj);
    swap_cols(f.T, t, pj);

    for (;;) {
      const bool col = clear_column(f, t);
      const bool row = clear_row(f, t);
      if (col || row) continue;
      // Pivot must divide the whole trailing block.
      bool divides = true;
      for (std::size_t i = t + 1; i < r && divides; ++i) {
        for (std::size_t j = t + 1; j < c; ++j) {
          if (f.D(i, j) % f.D(t, t) != 0) {
            combine_rows(f.D, t, i, Int(1), Int(1), Int(0), Int(1));
            combine_rows(f.S, t, i, Int(1), Int(1), Int(0), Int(1));
            divides = false;
            break;
          }
        }
      }
      if (divides) break;
    }
    if (f.D(t, t) < 0) {
      combine_rows(f.D, t, t, Int(-1), Int(0), Int(-1), Int(0));
      combine_rows(f.S, t, t, Int(-1), Int(0), Int(-1), Int(0));
    }
  }
  f.rank = t;
  return f;
}

using Rational = boost::rational<Big>;

Big round_rational(const Rational& q) {
  // floor((2n + d) / 2d), d > 0
  const Big num = 2 * q.numerator() + q.denominator(), den = 2 * q.denominator();
  Big out = num / den;
  if (num % den < 0) --out;
  return out;
}

Rational dot_q(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct GramSchmidt {
  std::vector<std::vector<Rational>> star;
  std::vector<Rational> norm;
};

GramSchmidt gram_schmidt(const std::vector<std::vector<Big>>& b) {
  GramSchmidt g;
  for (const auto& v : b) {
    std::vector<Rational> s(v.begin(), v.end());
    for (std::size_t j = 0; j < g.star.size(); ++j) {
      const Rational mu = dot_q(std::vector<Rational>(v.begin(), v.end()), g.star[j]) / g.norm[j];
      for (std::size_t t = 0; t < s.size(); ++t) s[t] -= mu * g.star[j][t];
    }
    g.norm.push_back(dot_q(s, s));
    g.star.push_back(std::move(s));
  }
  return g;
}

Rational projection(const std::vector<Big>& v, const GramSchmidt& g, std::size_t j) {
  return dot_q(std::vector<Rational>(v.begin(), v.end()), g.star[j]) / g.norm[j];
}

void subtract_multiple(std::vector<Big>& v, const Big& q, const std::vector<Big>& w) {
  for (std::size_t t = 0; t < v.size(); ++t) v[t] -= q * w[t];
}

// Exact LLL reduction (delta = 3/4) of linearly independent rows.
void lll(std::vector<std::vector<Big>>& b) {
  if (b.size() < 2) return;
  GramSchmidt g = gram_schmidt(b);
  std::size_t k = 1;
  while (k < b.size()) {
    for (std::size_t j = k; j-- > 0;) {
      const Big q = round_rational(projection(b[k], g, j));
      if (q != 0) subtract_multiple(b[k], q, b[j]);
    }
    const Rational mu = projection(b[k], g, k - 1);
    if (g.norm[k] >= (Rational(3, 4) - mu * mu) * g.norm[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      g = gram_schmidt(b);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
}

// Rows [from, rows) of a transform span a kernel lattice; LLL-reduce them and
// reduce the remaining rows modulo that lattice. Both steps are unimodular
// row operations that leave S A T unchanged.
void reduce_kernel_rows(Dense<Big>& m, std::size_t from) {
  if (from >= m.rows) return;
  std::vector<std::vector<Big>> kernel;
  for (std::size_t i = from; i < m.rows; ++i) {
    kernel.emplace_back(m.a.begin() + static_cast<std::ptrdiff_t>(i * m.cols),
                        m.a.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.cols));
  }
  lll(kernel);
  const GramSchmidt g = gram_schmidt(kernel);
  for (std::size_t i = 0; i < from; ++i) {
    std::vector<Big> v(m.a.begin() + static_cast<std::ptrdiff_t>(i * m.cols),
                       m.a.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.cols));
    for (std::size_t j = kernel.size(); j-- > 0;) {
      const Big q = round_rational(projection(v, g, j));
      if (q != 0) subtract_multiple(v, q, kernel[j]);
    }
    std::copy(v.begin(), v.end(), m.a.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
  for (std::size_t i = from; i < m.rows; ++i) {
    std::copy(kernel[i - from].begin(), kernel[i - from].end(), m.a.begin() + static_cast<std::ptrdiff_t>(i * m.cols));
  }
}

Dense<std::int64_t> dense_of(const IntMatrix& a) {
  Dense<std::int64_t> d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(i, j) = a(i, j);
  return d;
}

template <class Int>
Dense<Big> widen(const Dense<Int>& a) {
  Dense<Big> d(a.rows, a.cols);
  for (std::size_t i = 0; i < a.a.size(); ++i) d.a[i] = a.a[i];
  return d;
}

IntMatrix narrow(const Dense<Big>& a) {
  IntMatrix m(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) {
      const Big& x = a(i, j);
      if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min()) {
        throw IntegerOverflow("Smith normal form transform");
      }
      m(i, j) = x.convert_to<std::int64_t>();
    }
  }
  return m;
}

IntMatrix narrow(const Dense<std::int64_t>& a) {
  IntMatrix m(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(i, j) = a(i, j);
  return m;
}

std::int64_t max_magnitude(const Dense<std::int64_t>& a) {
  std::int64_t m = 0;
  for (auto x : a.a) m = std::max(m, abs_checked(x));
  return m;
}

// Transforms with entries beyond this are reduced before they are returned.
constexpr std::int64_t kReduceAbove = std::int64_t{1} << 20;

}  // namespace

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  a_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error("IntMatrix: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntVector IntMatrix::row(std::size_t r) const {
  return IntVector(a_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                   a_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw Error("IntMatrix product: shape mismatch");
  IntMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const std::int64_t aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = add(out(i, j), mul(aik, b(k, j)));
    }
  }
  return out;
}

IntVector left_multiply(std::span<const std::int64_t> v, const IntMatrix& a) {
  if (v.size() != a.rows()) throw Error("left_multiply: length mismatch");
  IntVector out(a.cols(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (v[i] == 0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] = add(out[j], mul(v[i], a(i, j)));
  }
  return out;
}

std::int64_t determinant(const IntMatrix& a) {
  if (a.rows() != a.cols()) throw Error("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  std::vector<__int128> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j);
  }
  auto at = [&](std::size_t i, std::size_t j) -> __int128& { return m[i * n + j]; };
  int sign = 1;
  __int128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      }
    }
    prev = at(k, k);
  }
  const __int128 det = sign * at(n - 1, n - 1);
  if (det > std::numeric_limits<std::int64_t>::max() || det < std::numeric_limits<std::int64_t>::min()) {
    throw IntegerOverflow("determinant");
  }
  return static_cast<std::int64_t>(det);
}

SnfDecomposition smith_normal_form(const IntMatrix& a) {
  std::optional<Snf<std::int64_t>> fast;
  try {
    fast = snf_core(dense_of(a));
  } catch (const IntegerOverflow&) {
    // Intermediate growth; redo the elimination without a bound.
  }
  if (fast && max_magnitude(fast->S) <= kReduceAbove && max_magnitude(fast->T) <= kReduceAbove) {
    return {narrow(fast->S), narrow(fast->D), narrow(fast->T), fast->rank};
  }
  Snf<Big> big = fast ? Snf<Big>{widen(fast->S), widen(fast->D), widen(fast->T), fast->rank}
                      : snf_core(widen(dense_of(a)));
  reduce_kernel_rows(big.S, big.rank);
  Dense<Big> tt = big.T.transposed();
  reduce_kernel_rows(tt, big.rank);
  return {narrow(big.S), narrow(big.D), narrow(tt.transposed()), big.rank};
}

std::size_t rank(const IntMatrix& a) {
  if (a.empty()) return 0;
  return smith_normal_form(a).rank;
}

std::vector<IntVector> nullspace_basis(const IntMatrix& a) {
  const std::size_t d = a.rows();
  if (a.cols() == 0) {
    std::vector<IntVector> unit;
    for (std::size_t i = 0; i < d; ++i) {
      IntVector e(d, 0);
      e[i] = 1;
      unit.push_back(std::move(e));
    }
    return unit;
  }
  const SnfDecomposition snf = smith_normal_form(a);
  // alpha^T A = 0  <=>  (alpha^T S^{-1}) D = 0, so the rows of S past the rank
  // span the kernel, and S unimodular makes them a lattice basis.
  std::vector<IntVector> basis;
  for (std::size_t i = snf.rank; i < d; ++i) basis.push_back(snf.S.row(i));
  size_reduce(basis);
  for (auto& v : basis) {
    auto first = std::find_if(v.begin(), v.end(), [](std::int64_t x) { return x != 0; });
    if (first != v.end() && *first < 0) {
      for (auto& x : v) x = -x;
    }
  }
  return basis;
}

std::optional<IntVector> solve_diophantine(const IntMatrix& a, std::span<const std::int64_t> b) {
  const std::size_t d = a.rows(), k = a.cols();
  if (b.size() != k) throw Error("solve_diophantine: rhs length mismatch");
  if (std::all_of(b.begin(), b.end(), [](std::int64_t x) { return x == 0; })) {
    return IntVector(d, 0);
  }
  if (d == 0) return std::nullopt;
  const SnfDecomposition snf = smith_normal_form(a);
  // alpha^T A = b^T  <=>  beta^T D = b^T T  with  beta^T = alpha^T S^{-1}.
  const IntVector rhs = left_multiply(b, snf.T);
  IntVector beta(d, 0);
  for (std::size_t i = 0; i < k; ++i) {
    if (i < snf.rank) {
      const std::int64_t di = snf.D(i, i);
      if (rhs[i] % di != 0) return std::nullopt;
      beta[i] = rhs[i] / di;
    } else if (rhs[i] != 0) {
      return std::nullopt;
    }
  }
  return left_multiply(beta, snf.S);
}

std::optional<IntVector> lattice_coordinates(const std::vector<IntVector>& basis,
                                             std::span<const std::int64_t> v) {
  if (basis.empty()) {
    if (std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; })) return IntVector{};
    return std::nullopt;
  }
  IntMatrix B(basis.size(), v.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i].size() != v.size()) throw Error("lattice_coordinates: length mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) B(i, j) = basis[i][j];
  }
  return solve_diophantine(B, v);
}

std::int64_t gcd_of(std::span<const std::int64_t> v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g;
}

}  // namespace ueq
