#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bacforge/field_linalg.hpp"

namespace bacforge {

/// Generator columns of one bucket; each column has length n.
using Bucket = std::vector<FVector>;

/// An array code: m buckets of generator columns over F_p.
/// N is never stored; total_length() derives it.
class CodeSpec {
 public:
  CodeSpec(PrimeField field, std::size_t n, std::vector<Bucket> buckets);

  const PrimeField& field() const noexcept { return field_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return buckets_.size(); }
  const std::vector<Bucket>& buckets() const noexcept { return buckets_; }
  const Bucket& bucket(std::size_t l) const { return buckets_.at(l); }
  std::size_t bucket_size(std::size_t l) const { return buckets_.at(l).size(); }

  bool operator==(const CodeSpec&) const = default;

 private:
  PrimeField field_;
  std::size_t n_;
  std::vector<Bucket> buckets_;
};

struct Codeword {
  std::vector<FVector> values;
  bool operator==(const Codeword&) const = default;
};

std::size_t total_length(const CodeSpec& code) noexcept;

Codeword encode(const CodeSpec& code, const FVector& x);

/// True iff e_symbol lies in the joint column span of the given buckets (0-based indices).
bool bucket_set_recovers(const CodeSpec& code, std::span<const std::size_t> buckets, std::size_t symbol);

/// Replace each bucket by the lowest-index-first basis of its column space.
CodeSpec cap_and_reduce(const CodeSpec& code);

}  // namespace bacforge
