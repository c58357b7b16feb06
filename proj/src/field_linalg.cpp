#include "bacforge/field_linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bacforge {

namespace {

bool is_prime(std::uint32_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d) {
    if (p % d == 0) return false;
  }
  return true;
}

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("vector length mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

}  // namespace

PrimeField::PrimeField(std::uint32_t p) : p_(p) {
  if (p >= (1u << 31)) throw std::invalid_argument("field modulus must be below 2^31");
  if (!is_prime(p)) throw std::invalid_argument("field modulus " + std::to_string(p) + " is not prime");
}

Residue PrimeField::inverse(Residue a) const {
  a %= p_;
  if (a == 0) throw std::domain_error("not invertible");
  // Extended Euclid on (a, p).
  std::int64_t r0 = p_, r1 = a, s0 = 0, s1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::tie(r0, r1) = std::pair{r1, r0 - q * r1};
    std::tie(s0, s1) = std::pair{s1, s0 - q * s1};
  }
  return reduce(s0);
}

Residue ff_inverse(Residue a, const PrimeField& field) { return field.inverse(a); }

FVector::FVector(const PrimeField& field, std::span<const std::int64_t> values) {
  entries_.reserve(values.size());
  for (auto v : values) entries_.push_back(field.reduce(v));
}

FVector::FVector(const PrimeField& field, std::initializer_list<std::int64_t> values)
    : FVector(field, std::span<const std::int64_t>(values.begin(), values.size())) {}

FVector::FVector(const PrimeField& field, std::vector<Residue> residues) : entries_(std::move(residues)) {
  for (auto& e : entries_) e %= field.modulus();
}

FVector FVector::unit(std::size_t length, std::size_t index) {
  if (index >= length) throw std::out_of_range("unit vector index out of range");
  std::vector<Residue> e(length, 0);
  e[index] = 1;
  return FVector(std::move(e));
}

bool FVector::is_zero() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](Residue r) { return r == 0; });
}

std::size_t FVector::nonzero_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](Residue r) { return r != 0; }));
}

std::optional<std::size_t> FVector::unit_index() const noexcept {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] == 0) continue;
    if (entries_[i] != 1 || found) return std::nullopt;
    found = i;
  }
  return found;
}

Residue dot(const FVector& a, const FVector& b, const PrimeField& field) {
  require_same_length(a.size(), b.size());
  std::uint64_t acc = 0;
  const std::uint64_t p = field.modulus();
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc = (acc + std::uint64_t{a[i]} * b[i]) % p;
  }
  return static_cast<Residue>(acc);
}

FVector add(const FVector& a, const FVector& b, const PrimeField& field) {
  require_same_length(a.size(), b.size());
  std::vector<Residue> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = field.add(a[i], b[i]);
  return FVector(field, std::move(out));
}

FVector scale(const FVector& v, Residue c, const PrimeField& field) {
  std::vector<Residue> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = field.mul(v[i], c);
  return FVector(field, std::move(out));
}

FVector combine(std::span<const FVector> generators, std::span<const Residue> coeffs,
                const PrimeField& field, std::size_t length) {
  require_same_length(generators.size(), coeffs.size());
  std::vector<Residue> out(length, 0);
  for (std::size_t g = 0; g < generators.size(); ++g) {
    require_same_length(generators[g].size(), length);
    const Residue c = field.reduce(coeffs[g]);
    if (c == 0) continue;
    for (std::size_t i = 0; i < length; ++i) out[i] = field.add(out[i], field.mul(c, generators[g][i]));
  }
  return FVector(field, std::move(out));
}

std::optional<std::vector<Residue>> span_solve(const FVector& target,
                                               std::span<const FVector> generators,
                                               const PrimeField& field) {
  const std::size_t rows = target.size();
  const std::size_t cols = generators.size();
  for (const auto& g : generators) require_same_length(g.size(), rows);

  // Augmented matrix [G | target], G having the generators as columns.
  std::vector<std::vector<Residue>> a(rows, std::vector<Residue>(cols + 1, 0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) a[r][c] = generators[c][r];
    a[r][cols] = target[r];
  }

  std::vector<std::size_t> pivot_col_of_row;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && a[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(a[r], a[sel]);
    const Residue inv = field.inverse(a[r][c]);
    for (auto& e : a[r]) e = field.mul(e, inv);
    for (std::size_t o = 0; o < rows; ++o) {
      if (o == r || a[o][c] == 0) continue;
      const Residue f = a[o][c];
      for (std::size_t j = c; j <= cols; ++j) a[o][j] = field.sub(a[o][j], field.mul(f, a[r][j]));
    }
    pivot_col_of_row.push_back(c);
    ++r;
  }
  for (std::size_t o = r; o < rows; ++o) {
    if (a[o][cols] != 0) return std::nullopt;
  }
  std::vector<Residue> coeffs(cols, 0);
  for (std::size_t i = 0; i < pivot_col_of_row.size(); ++i) coeffs[pivot_col_of_row[i]] = a[i][cols];
  return coeffs;
}

std::size_t rank(std::span<const FVector> vectors, const PrimeField& field) {
  if (vectors.empty()) return 0;
  Subspace s(field, vectors.front().size());
  for (const auto& v : vectors) s.insert(v);
  return s.rank();
}

Subspace::Subspace(const PrimeField& field, std::size_t dimension, Backend backend)
    : field_(field),
      dim_(dimension),
      packed_(field.modulus() == 2 && backend == Backend::Automatic),
      pivot_row_(dimension, -1) {}

void Subspace::check_length(const FVector& v) const { require_same_length(v.size(), dim_); }

Subspace::Bits Subspace::to_bits(const FVector& v) const {
  Bits b(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    if (v[i] & 1u) b.set(i);
  }
  return b;
}

std::size_t Subspace::reduce_bits(Bits& v) const {
  for (auto c = v.find_first(); c != Bits::npos; c = v.find_next(c)) {
    const int row = pivot_row_[c];
    if (row < 0) return c;
    v ^= bit_rows_[static_cast<std::size_t>(row)];
  }
  return dim_;
}

std::size_t Subspace::reduce_generic(std::vector<Residue>& v) const {
  for (std::size_t c = 0; c < dim_; ++c) {
    if (v[c] == 0) continue;
    const int row = pivot_row_[c];
    if (row < 0) return c;
    const auto& pr = rows_[static_cast<std::size_t>(row)];
    const Residue f = v[c];
    for (std::size_t j = c; j < dim_; ++j) {
      if (pr[j] != 0) v[j] = field_.sub(v[j], field_.mul(f, pr[j]));
    }
  }
  return dim_;
}

bool Subspace::insert(const FVector& v) {
  check_length(v);
  if (packed_) {
    Bits b = to_bits(v);
    const std::size_t lead = reduce_bits(b);
    if (lead == dim_) return false;
    pivot_row_[lead] = static_cast<int>(bit_rows_.size());
    bit_rows_.push_back(std::move(b));
  } else {
    std::vector<Residue> w(v.begin(), v.end());
    const std::size_t lead = reduce_generic(w);
    if (lead == dim_) return false;
    const Residue inv = field_.inverse(w[lead]);
    for (auto& e : w) e = field_.mul(e, inv);
    pivot_row_[lead] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(w));
  }
  ++rank_;
  return true;
}

bool Subspace::contains(const FVector& v) const {
  check_length(v);
  if (packed_) {
    Bits b = to_bits(v);
    return reduce_bits(b) == dim_;
  }
  std::vector<Residue> w(v.begin(), v.end());
  return reduce_generic(w) == dim_;
}

bool Subspace::contains_unit(std::size_t index) const {
  if (index >= dim_) throw std::out_of_range("unit index out of range");
  if (packed_) {
    Bits b(dim_);
    b.set(index);
    return reduce_bits(b) == dim_;
  }
  std::vector<Residue> w(dim_, 0);
  w[index] = 1;
  return reduce_generic(w) == dim_;
}

}  // namespace bacforge
