#include "bacforge/code_model.hpp"

#include <stdexcept>
#include <string>

namespace bacforge {

CodeSpec::CodeSpec(PrimeField field, std::size_t n, std::vector<Bucket> buckets)
    : field_(field), n_(n), buckets_(std::move(buckets)) {
  if (n_ == 0) throw std::invalid_argument("code needs n >= 1");
  if (buckets_.empty()) throw std::invalid_argument("code needs m >= 1");
  for (std::size_t l = 0; l < buckets_.size(); ++l) {
    for (auto& col : buckets_[l]) {
      if (col.size() != n_) {
        throw std::invalid_argument("bucket " + std::to_string(l + 1) + " has a column of length " +
                                    std::to_string(col.size()) + ", expected " + std::to_string(n_));
      }
      // Re-normalize in case columns were built under another modulus.
      col = FVector(field_, std::vector<Residue>(col.begin(), col.end()));
    }
  }
}

std::size_t total_length(const CodeSpec& code) noexcept {
  std::size_t total = 0;
  for (const auto& b : code.buckets()) total += b.size();
  return total;
}

Codeword encode(const CodeSpec& code, const FVector& x) {
  if (x.size() != code.n()) {
    throw std::invalid_argument("data length " + std::to_string(x.size()) + " does not match n = " +
                                std::to_string(code.n()));
  }
  Codeword cw;
  cw.values.reserve(code.m());
  for (const auto& bucket : code.buckets()) {
    std::vector<Residue> vals;
    vals.reserve(bucket.size());
    for (const auto& col : bucket) vals.push_back(dot(x, col, code.field()));
    cw.values.emplace_back(code.field(), std::move(vals));
  }
  return cw;
}

bool bucket_set_recovers(const CodeSpec& code, std::span<const std::size_t> buckets, std::size_t symbol) {
  if (symbol >= code.n()) throw std::out_of_range("symbol index out of range");
  Subspace span(code.field(), code.n());
  for (auto l : buckets) {
    if (l >= code.m()) throw std::out_of_range("bucket index out of range");
    for (const auto& col : code.bucket(l)) span.insert(col);
  }
  return span.contains_unit(symbol);
}

CodeSpec cap_and_reduce(const CodeSpec& code) {
  std::vector<Bucket> reduced;
  reduced.reserve(code.m());
  for (const auto& bucket : code.buckets()) {
    Subspace span(code.field(), code.n());
    Bucket kept;
    for (const auto& col : bucket) {
      if (span.insert(col)) kept.push_back(col);
    }
    reduced.push_back(std::move(kept));
  }
  return CodeSpec(code.field(), code.n(), std::move(reduced));
}

}  // namespace bacforge
