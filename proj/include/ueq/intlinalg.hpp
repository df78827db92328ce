#pragma once

// Exact integer linear algebra on checked 64-bit entries: Smith normal form,
// rank, integer nullspace lattices and linear Diophantine solves.
//
// Conventions: for a d x k units matrix A (one row per feature), exponent
// vectors alpha live in Z^d and act from the left, alpha^T A in Z^k.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace ueq {

using IntVector = std::vector<std::int64_t>;

class IntMatrix {
public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0) {}
  IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  static IntMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  std::int64_t& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  std::int64_t operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  IntVector row(std::size_t r) const;
  IntMatrix transposed() const;

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::int64_t> a_;
};

/// Checked product; throws IntegerOverflow.
IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);

/// v^T A for a row vector v of length A.rows().
IntVector left_multiply(std::span<const std::int64_t> v, const IntMatrix& a);

/// Exact determinant (fraction-free Bareiss elimination on 128-bit ints).
std::int64_t determinant(const IntMatrix& a);

/// S A T = D with S, T unimodular and D diagonal, d_1 | d_2 | ... , d_i >= 0.
struct SnfDecomposition {
  IntMatrix S, D, T;
  std::size_t rank = 0;

  std::int64_t invariant(std::size_t i) const { return D(i, i); }
};

SnfDecomposition smith_normal_form(const IntMatrix& a);

std::size_t rank(const IntMatrix& a);

/// Lattice basis of {alpha in Z^d : alpha^T A = 0}; d - rank(A) primitive
/// vectors, each with its first nonzero entry positive.
std::vector<IntVector> nullspace_basis(const IntMatrix& a);

/// One integer alpha with alpha^T A = b^T, or nullopt when none exists.
std::optional<IntVector> solve_diophantine(const IntMatrix& a, std::span<const std::int64_t> b);

/// Integer coefficients c with sum_i c_i basis_i = v, or nullopt when v is
/// not in the lattice spanned by `basis`.
std::optional<IntVector> lattice_coordinates(const std::vector<IntVector>& basis,
                                             std::span<const std::int64_t> v);

std::int64_t gcd_of(std::span<const std::int64_t> v);

}  // namespace ueq
