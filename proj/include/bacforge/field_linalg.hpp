#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace bacforge {

using Residue = std::uint32_t;

/// The prime field F_p. Primality is checked by trial division on construction.
class PrimeField {
 public:
  explicit PrimeField(std::uint32_t p = 2);

  std::uint32_t modulus() const noexcept { return p_; }

  Residue reduce(std::int64_t value) const noexcept {
    const auto p = static_cast<std::int64_t>(p_);
    auto r = value % p;
    return static_cast<Residue>(r < 0 ? r + p : r);
  }
  Residue add(Residue a, Residue b) const noexcept {
    const std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<Residue>(s >= p_ ? s - p_ : s);
  }
  Residue sub(Residue a, Residue b) const noexcept { return a >= b ? a - b : a + (p_ - b); }
  Residue neg(Residue a) const noexcept { return a == 0 ? 0 : p_ - a; }
  Residue mul(Residue a, Residue b) const noexcept {
    return static_cast<Residue>((std::uint64_t{a} * b) % p_);
  }
  Residue inverse(Residue a) const;

  bool operator==(const PrimeField&) const = default;

 private:
  std::uint32_t p_;
};

/// Multiplicative inverse of a modulo p; throws std::domain_error for a = 0.
Residue ff_inverse(Residue a, const PrimeField& field);

/// A vector over F_p with every entry stored canonically in [0, p).
class FVector {
 public:
  FVector() = default;
  FVector(const PrimeField& field, std::span<const std::int64_t> values);
  FVector(const PrimeField& field, std::initializer_list<std::int64_t> values);
  FVector(const PrimeField& field, std::vector<Residue> residues);

  static FVector zero(std::size_t length) { return FVector(std::vector<Residue>(length, 0)); }
  static FVector unit(std::size_t length, std::size_t index);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  Residue operator[](std::size_t i) const { return entries_[i]; }
  std::span<const Residue> entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  bool is_zero() const noexcept;
  std::size_t nonzero_count() const noexcept;
  /// Index of the single nonzero entry if this is a standard basis vector e_i.
  std::optional<std::size_t> unit_index() const noexcept;

  bool operator==(const FVector&) const = default;
  auto operator<=>(const FVector&) const = default;

 private:
  explicit FVector(std::vector<Residue> trusted) : entries_(std::move(trusted)) {}
  std::vector<Residue> entries_;
};

Residue dot(const FVector& a, const FVector& b, const PrimeField& field);
FVector add(const FVector& a, const FVector& b, const PrimeField& field);
FVector scale(const FVector& v, Residue c, const PrimeField& field);

/// Σ coeffs[i]·generators[i]; the empty combination needs an explicit length.
FVector combine(std::span<const FVector> generators, std::span<const Residue> coeffs,
                const PrimeField& field, std::size_t length);

/// Coefficients c with Σ c_i·g_i = target, or nullopt when target is outside the span.
/// Gaussian elimination with lowest-index pivot rows; free variables are set to zero.
std::optional<std::vector<Residue>> span_solve(const FVector& target,
                                               std::span<const FVector> generators,
                                               const PrimeField& field);

std::size_t rank(std::span<const FVector> vectors, const PrimeField& field);

/// Incrementally built subspace of F_p^dim kept in echelon form.
/// Over F_2 rows are bit-packed unless the generic backend is forced.
class Subspace {
 public:
  enum class Backend { Automatic, Generic };

  Subspace(const PrimeField& field, std::size_t dimension, Backend backend = Backend::Automatic);

  /// Returns true when v was independent of the current rows (rank grew).
  bool insert(const FVector& v);
  bool contains(const FVector& v) const;
  bool contains_unit(std::size_t index) const;

  std::size_t rank() const noexcept { return rank_; }
  std::size_t dimension() const noexcept { return dim_; }
  bool packed() const noexcept { return packed_; }

 private:
  using Bits = boost::dynamic_bitset<std::uint64_t>;

  Bits to_bits(const FVector& v) const;
  // Both reducers leave the vector in place; they return the leading column or dim_ if zero.
  std::size_t reduce_bits(Bits& v) const;
  std::size_t reduce_generic(std::vector<Residue>& v) const;
  void check_length(const FVector& v) const;

  PrimeField field_;
  std::size_t dim_;
  bool packed_;
  std::size_t rank_ = 0;
  std::vector<int> pivot_row_;  // column -> row index, -1 when no pivot
  std::vector<Bits> bit_rows_;
  std::vector<std::vector<Residue>> rows_;
};

}  // namespace bacforge
