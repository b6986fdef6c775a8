#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace aclgate {

// Fixed-width bit vector over canonical vertex indices. Word-parallel AND is
// the inner loop of every expansion, so this stays a thin wrapper around
// uint64_t words rather than std::vector<bool>.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t nbits)
      : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  static Bitset full(std::size_t nbits) {
    Bitset b(nbits);
    for (auto& w : b.words_) w = ~std::uint64_t{0};
    b.trim();
    return b;
  }

  std::size_t size() const { return nbits_; }

  bool test(std::size_t i) const {
    assert(i < nbits_);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  void set(std::size_t i) {
    assert(i < nbits_);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }

  void reset(std::size_t i) {
    assert(i < nbits_);
    words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool any() const {
    for (auto w : words_)
      if (w != 0) return true;
    return false;
  }

  bool none() const { return !any(); }

  Bitset& operator&=(const Bitset& other) {
    assert(nbits_ == other.nbits_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
  }

  Bitset& operator|=(const Bitset& other) {
    assert(nbits_ == other.nbits_);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
  }

  friend Bitset operator&(Bitset lhs, const Bitset& rhs) {
    lhs &= rhs;
    return lhs;
  }

  bool is_subset_of(const Bitset& other) const {
    assert(nbits_ == other.nbits_);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~other.words_[i]) return false;
    return true;
  }

  bool intersects(const Bitset& other) const {
    assert(nbits_ == other.nbits_);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }

  bool operator==(const Bitset& other) const = default;

  // Visits set bits in ascending index order.
  template <typename Fn>
  void for_each(Fn fn) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      std::uint64_t w = words_[wi];
      while (w != 0) {
        const int tz = std::countr_zero(w);
        fn(wi * 64 + static_cast<std::size_t>(tz));
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

 private:
  void trim() {
    const std::size_t rem = nbits_ & 63;
    if (rem != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << rem) - 1;
  }

  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Canonical order on index sets: compare as ascending index sequences,
// shorter-prefix first. With vertices sorted by id this matches the
// lexicographic order on sorted id lists.
inline int lex_compare(const Bitset& a, const Bitset& b) {
  const auto ia = a.indices();
  const auto ib = b.indices();
  const std::size_t n = ia.size() < ib.size() ? ia.size() : ib.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (ia[i] != ib[i]) return ia[i] < ib[i] ? -1 : 1;
  }
  if (ia.size() != ib.size()) return ia.size() < ib.size() ? -1 : 1;
  return 0;
}

}  // namespace aclgate
