#include "formctl/liealg.hpp"

#include <numeric>
#include <string>

#include "formctl/errors.hpp"

namespace formctl {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::ArithmeticOverflow, "matrix entry overflow");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::ArithmeticOverflow, "matrix entry overflow");
  return out;
}

void require_same_size(int a, int b) {
  if (a != b) {
    throw Error(ErrorCode::SizeMismatch,
                "matrix sizes differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

ZeroRowSumMatrix::ZeroRowSumMatrix(int size)
    : size_(size), entries_(static_cast<std::size_t>(size) * size, 0) {}

ZeroRowSumMatrix ZeroRowSumMatrix::from_entries(int size, std::vector<std::int64_t> row_major) {
  if (size < 0 || row_major.size() != static_cast<std::size_t>(size) * size) {
    throw Error(ErrorCode::SizeMismatch, "entry count is not size^2");
  }
  for (int r = 0; r < size; ++r) {
    std::int64_t sum = 0;
    for (int c = 0; c < size; ++c) sum = checked_add(sum, row_major[r * size + c]);
    if (sum != 0) {
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(r + 1) + " does not sum to zero");
    }
  }
  ZeroRowSumMatrix m;
  m.size_ = size;
  m.entries_ = std::move(row_major);
  return m;
}

bool ZeroRowSumMatrix::is_zero() const {
  for (auto v : entries_)
    if (v != 0) return false;
  return true;
}

ZeroRowSumMatrix ZeroRowSumMatrix::operator+(const ZeroRowSumMatrix& other) const {
  require_same_size(size_, other.size_);
  ZeroRowSumMatrix out(size_);
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = checked_add(entries_[k], other.entries_[k]);
  return out;
}

ZeroRowSumMatrix ZeroRowSumMatrix::operator-(const ZeroRowSumMatrix& other) const {
  return *this + other.scaled(-1);
}

ZeroRowSumMatrix ZeroRowSumMatrix::scaled(std::int64_t factor) const {
  ZeroRowSumMatrix out(size_);
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = checked_mul(entries_[k], factor);
  return out;
}

EdgeGenerator EdgeGenerator::make(int i, int j, int size) {
  if (i == j || i < 0 || j < 0 || i >= size || j >= size) {
    throw Error(ErrorCode::InvalidIndices, "generator indices (" + std::to_string(i + 1) + ", " +
                                               std::to_string(j + 1) + ") invalid for size " +
                                               std::to_string(size));
  }
  return EdgeGenerator{i, j, size};
}

ZeroRowSumMatrix EdgeGenerator::dense() const {
  std::vector<std::int64_t> entries(static_cast<std::size_t>(size) * size, 0);
  entries[i * size + i] = -1;
  entries[i * size + j] = 1;
  return ZeroRowSumMatrix::from_entries(size, std::move(entries));
}

ZeroRowSumMatrix edge_generator(int i, int j, int size) { return EdgeGenerator::make(i, j, size).dense(); }

ZeroRowSumMatrix densify(const GeneratorCombination& combination, int size) {
  ZeroRowSumMatrix out(size);
  for (const auto& [edge, coeff] : combination.terms) {
    if (coeff == 0) continue;
    out = out + edge_generator(edge.from, edge.to, size).scaled(coeff);
  }
  return out;
}

GeneratorCombination decompose(const ZeroRowSumMatrix& m) {
  GeneratorCombination out;
  for (int r = 0; r < m.size(); ++r)
    for (int c = 0; c < m.size(); ++c)
      if (r != c && m(r, c) != 0) out.terms[{r, c}] = m(r, c);
  return out;
}

ZeroRowSumMatrix bracket(const ZeroRowSumMatrix& a, const ZeroRowSumMatrix& b) {
  require_same_size(a.size(), b.size());
  const int n = a.size();
  std::vector<std::int64_t> out(static_cast<std::size_t>(n) * n, 0);
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < n; ++k) {
      const std::int64_t ark = a(r, k);
      const std::int64_t brk = b(r, k);
      if (ark == 0 && brk == 0) continue;
      for (int c = 0; c < n; ++c) {
        std::int64_t term = checked_add(checked_mul(ark, b(k, c)), -checked_mul(brk, a(k, c)));
        out[r * n + c] = checked_add(out[r * n + c], term);
      }
    }
  }
  return ZeroRowSumMatrix::from_entries(n, std::move(out));
}

GeneratorCombination structural_bracket(const EdgeGenerator& a, const EdgeGenerator& b) {
  require_same_size(a.size, b.size);
  GeneratorCombination out;
  auto add = [&out](int i, int j, std::int64_t coeff) {
    auto& slot = out.terms[{i, j}];
    slot += coeff;
    if (slot == 0) out.terms.erase({i, j});
  };
  if (a.j == b.i && b.j == a.i) {
    throw Error(ErrorCode::DegenerateBracket, "bracket of a 2-cycle pair (" + std::to_string(a.i + 1) +
                                                  ", " + std::to_string(a.j + 1) + ")");
  }
  if (a.i == b.i) {
    add(a.i, a.j, 1);
    add(a.i, b.j, -1);
  } else if (a.j == b.i) {
    add(a.i, b.j, 1);
    add(a.i, a.j, -1);
  } else if (b.j == a.i) {
    add(b.i, a.i, 1);
    add(b.i, a.j, -1);
  }
  return out;
}

void ExactSpan::reduce(std::vector<mpz_class>& v) const {
  for (const Row& row : rows_) {
    if (sgn(v[row.pivot]) == 0) continue;
    mpz_class scale_v = row.values[row.pivot];
    mpz_class scale_row = v[row.pivot];
    mpz_class content = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = scale_v * v[k] - scale_row * row.values[k];
      mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), v[k].get_mpz_t());
    }
    if (content > 1) {
      for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), content.get_mpz_t());
    }
  }
}

bool ExactSpan::insert(std::vector<mpz_class> v) {
  if (v.size() != dimension_) throw Error(ErrorCode::SizeMismatch, "vector length differs from span dimension");
  reduce(v);
  std::size_t pivot = 0;
  while (pivot < v.size() && sgn(v[pivot]) == 0) ++pivot;
  if (pivot == v.size()) return false;
  mpz_class content = 0;
  for (const auto& x : v) mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), x.get_mpz_t());
  for (auto& x : v) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), content.get_mpz_t());
  rows_.push_back({pivot, std::move(v)});
  return true;
}

bool ExactSpan::contains(std::vector<mpz_class> v) const {
  if (v.size() != dimension_) throw Error(ErrorCode::SizeMismatch, "vector length differs from span dimension");
  reduce(v);
  for (const auto& x : v)
    if (sgn(x) != 0) return false;
  return true;
}

std::vector<mpz_class> vectorize(const ZeroRowSumMatrix& m) {
  const int n = m.size();
  std::vector<mpz_class> out;
  out.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (r != c) out.emplace_back(static_cast<long>(m(r, c)));
  return out;
}

LieBasis::LieBasis(int size)
    : size_(size), span_(static_cast<std::size_t>(size) * (size > 0 ? size - 1 : 0)) {}

LieBasis LieBasis::spanning(int size, const std::vector<ZeroRowSumMatrix>& matrices) {
  LieBasis basis(size);
  for (const auto& m : matrices) basis.try_add(m);
  return basis;
}

bool LieBasis::try_add(const ZeroRowSumMatrix& m) {
  require_same_size(size_, m.size());
  if (!span_.insert(vectorize(m))) return false;
  elements_.push_back(m);
  return true;
}

bool LieBasis::contains(const ZeroRowSumMatrix& m) const {
  require_same_size(size_, m.size());
  return span_.contains(vectorize(m));
}

std::vector<EdgeGenerator> generators_of(const Digraph& g) {
  std::vector<EdgeGenerator> out;
  out.reserve(g.num_edges());
  for (const Edge& e : g.edges()) out.push_back(EdgeGenerator::make(e.from, e.to, g.num_vertices()));
  return out;
}

LieBasis generator_basis(const Digraph& g) {
  LieBasis basis(g.num_vertices());
  for (const auto& gen : generators_of(g)) basis.try_add(gen.dense());
  return basis;
}

namespace {

GeneratorCombination structural_bracket_of(const GeneratorCombination& a, const GeneratorCombination& b,
                                           int size) {
  GeneratorCombination out;
  for (const auto& [ea, ca] : a.terms) {
    for (const auto& [eb, cb] : b.terms) {
      const auto ga = EdgeGenerator::make(ea.from, ea.to, size);
      const auto gb = EdgeGenerator::make(eb.from, eb.to, size);
      GeneratorCombination term;
      if (ea.to == eb.from && eb.to == ea.from) {
        term = decompose(bracket(ga.dense(), gb.dense()));
      } else {
        term = structural_bracket(ga, gb);
      }
      const std::int64_t scale = checked_mul(ca, cb);
      for (const auto& [e, c] : term.terms) {
        auto& slot = out.terms[e];
        slot = checked_add(slot, checked_mul(scale, c));
      }
    }
  }
  std::erase_if(out.terms, [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace

LieBasis lie_closure(const std::vector<EdgeGenerator>& generators, BracketRoute route) {
  if (generators.empty()) throw Error(ErrorCode::EmptyGeneratorSet, "no generators given");
  const int size = generators.front().size;
  LieBasis basis(size);
  for (const auto& gen : generators) {
    require_same_size(size, gen.size);
    basis.try_add(EdgeGenerator::make(gen.i, gen.j, gen.size).dense());
  }

  // Every pair (i, j), i < j, is bracketed exactly once; new members are
  // appended and picked up by later iterations of the outer loop.
  std::vector<GeneratorCombination> symbolic;
  if (route == BracketRoute::Structural) {
    for (const auto& m : basis.elements()) symbolic.push_back(decompose(m));
  }
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      ZeroRowSumMatrix candidate;
      if (route == BracketRoute::Dense) {
        candidate = bracket(basis.elements()[i], basis.elements()[j]);
      } else {
        candidate = densify(structural_bracket_of(symbolic[i], symbolic[j], size), size);
      }
      if (candidate.is_zero()) continue;
      if (basis.try_add(candidate) && route == BracketRoute::Structural) {
        symbolic.push_back(decompose(candidate));
      }
    }
  }
  return basis;
}

bool span_equal(const LieBasis& a, const LieBasis& b) {
  require_same_size(a.size(), b.size());
  if (a.dimension() != b.dimension()) return false;
  for (const auto& m : b.elements())
    if (!a.contains(m)) return false;
  return true;
}

}  // namespace formctl
