#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "formctl/digraph.hpp"

namespace formctl {

/// Exact N x N integer matrix whose rows sum to zero.
///
/// Arithmetic is checked; an intermediate that leaves the int64 range throws
/// ErrorCode::ArithmeticOverflow instead of wrapping.
class ZeroRowSumMatrix {
 public:
  ZeroRowSumMatrix() = default;
  explicit ZeroRowSumMatrix(int size);

  /// Row-major entries; throws InvalidArgument if some row does not sum to zero.
  static ZeroRowSumMatrix from_entries(int size, std::vector<std::int64_t> row_major);

  int size() const noexcept { return size_; }
  std::int64_t operator()(int row, int col) const { return entries_[row * size_ + col]; }
  const std::vector<std::int64_t>& entries() const noexcept { return entries_; }
  bool is_zero() const;

  ZeroRowSumMatrix operator+(const ZeroRowSumMatrix& other) const;
  ZeroRowSumMatrix operator-(const ZeroRowSumMatrix& other) const;
  ZeroRowSumMatrix scaled(std::int64_t factor) const;

  friend bool operator==(const ZeroRowSumMatrix&, const ZeroRowSumMatrix&) = default;

 private:
  int size_ = 0;
  std::vector<std::int64_t> entries_;
};

/// The single-edge generator A_ij = -e_i e_i^T + e_i e_j^T (0-based i, j).
struct EdgeGenerator {
  int i = 0;
  int j = 0;
  int size = 0;

  /// Throws InvalidIndices unless 0 <= i != j < size.
  static EdgeGenerator make(int i, int j, int size);
  ZeroRowSumMatrix dense() const;
};

ZeroRowSumMatrix edge_generator(int i, int j, int size);

/// Integer combination of edge generators, keyed by (i, j).
struct GeneratorCombination {
  std::map<Edge, std::int64_t> terms;

  friend bool operator==(const GeneratorCombination&, const GeneratorCombination&) = default;
};

ZeroRowSumMatrix densify(const GeneratorCombination& combination, int size);

/// Every zero row-sum matrix is sum_{i != j} a_ij A_ij, so the off-diagonal
/// entries are exactly its generator coefficients.
GeneratorCombination decompose(const ZeroRowSumMatrix& m);

/// Commutator ab - ba. Throws SizeMismatch on unequal sizes.
ZeroRowSumMatrix bracket(const ZeroRowSumMatrix& a, const ZeroRowSumMatrix& b);

/// Symbolic bracket of two generators:
///   shared source (i = i')            -> A_ij - A_ij'
///   head meets tail (j = i', j' != i) -> A_ij' - A_ij
///   tail meets head (j' = i, i' != j) -> A_i'i - A_i'j
///   otherwise                         -> 0
/// The 2-cycle pair [A_ij, A_ji] throws DegenerateBracket; callers use the dense bracket there.
GeneratorCombination structural_bracket(const EdgeGenerator& a, const EdgeGenerator& b);

/// Incremental exact row echelon form over the rationals.
///
/// Rows are integer vectors kept primitive (content removed after each
/// fraction-free elimination step).
class ExactSpan {
 public:
  explicit ExactSpan(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t rank() const noexcept { return rows_.size(); }

  /// Adds `v` if it is independent of the current rows; returns whether the rank grew.
  bool insert(std::vector<mpz_class> v);
  bool contains(std::vector<mpz_class> v) const;

 private:
  struct Row {
    std::size_t pivot;
    std::vector<mpz_class> values;
  };

  void reduce(std::vector<mpz_class>& v) const;

  std::size_t dimension_;
  std::vector<Row> rows_;
};

/// Off-diagonal coordinates of a zero row-sum matrix, a vector of length N(N-1).
std::vector<mpz_class> vectorize(const ZeroRowSumMatrix& m);

/// Linearly independent list of zero row-sum matrices with exact membership tests.
class LieBasis {
 public:
  LieBasis() = default;
  explicit LieBasis(int size);

  /// Drops members that depend on earlier ones.
  static LieBasis spanning(int size, const std::vector<ZeroRowSumMatrix>& matrices);

  int size() const noexcept { return size_; }
  std::size_t dimension() const noexcept { return elements_.size(); }
  const std::vector<ZeroRowSumMatrix>& elements() const noexcept { return elements_; }

  /// Appends `m` when it enlarges the span; returns whether it did.
  bool try_add(const ZeroRowSumMatrix& m);
  bool contains(const ZeroRowSumMatrix& m) const;

 private:
  int size_ = 0;
  std::vector<ZeroRowSumMatrix> elements_;
  ExactSpan span_;
};

/// Basis {A_ij : i->j in g}.
LieBasis generator_basis(const Digraph& g);
std::vector<EdgeGenerator> generators_of(const Digraph& g);

enum class BracketRoute { Dense, Structural };

/// Smallest bracket-closed subspace containing the generators, by worklist
/// saturation in insertion order. Both routes return identical bases.
LieBasis lie_closure(const std::vector<EdgeGenerator>& generators,
                     BracketRoute route = BracketRoute::Dense);

/// True iff both bases span the same rational subspace.
bool span_equal(const LieBasis& a, const LieBasis& b);

}  // namespace formctl
