#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace boa {

// Fixed-length bitset over records. Bits past size() are always zero, so
// popcounts over whole words never need masking.
class Bitset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t nbits, bool value = false)
      : nbits_(nbits), words_(word_count(nbits), value ? ~Word{0} : Word{0}) {
    if (value) clear_tail();
  }

  static constexpr std::size_t word_count(std::size_t nbits) {
    return (nbits + kWordBits - 1) / kWordBits;
  }

  std::size_t size() const { return nbits_; }
  std::size_t num_words() const { return words_.size(); }
  std::span<const Word> words() const { return words_; }
  std::span<Word> words() { return words_; }

  bool test(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool value = true) {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }
  void reset() { std::fill(words_.begin(), words_.end(), Word{0}); }

  std::size_t count() const {
    std::size_t c = 0;
    for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const {
    for (Word w : words_) {
      if (w != 0) return false;
    }
    return true;
  }
  bool any() const { return !none(); }

  Bitset& operator&=(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Bitset& operator|=(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  Bitset& operator^=(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
  }
  // this &= ~o
  Bitset& and_not(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }
  Bitset& flip() {
    for (Word& w : words_) w = ~w;
    clear_tail();
    return *this;
  }

  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset operator^(Bitset a, const Bitset& b) { return a ^= b; }
  friend Bitset operator~(Bitset a) { return a.flip(); }

  bool operator==(const Bitset&) const = default;

  bool is_subset_of(const Bitset& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if ((words_[i] & ~o.words_[i]) != 0) return false;
    }
    return true;
  }

  // Index of the k-th set bit (0-based), or size() when fewer bits are set.
  std::size_t nth_set(std::size_t k) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      Word w = words_[wi];
      const auto c = static_cast<std::size_t>(std::popcount(w));
      if (k >= c) {
        k -= c;
        continue;
      }
      for (; k > 0; --k) w &= w - 1;
      return wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w));
    }
    return nbits_;
  }

  template <class F>
  void for_each_set(F&& f) const {
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
      Word w = words_[wi];
      while (w != 0) {
        f(wi * kWordBits + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

 private:
  void clear_tail() {
    const std::size_t rem = nbits_ % kWordBits;
    if (rem != 0 && !words_.empty()) words_.back() &= (Word{1} << rem) - 1;
  }

  std::size_t nbits_ = 0;
  std::vector<Word> words_;
};

inline std::size_t count_and(const Bitset& a, const Bitset& b) {
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t c = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) c += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  return c;
}

// popcount(a & b & c)
inline std::size_t count_and(const Bitset& a, const Bitset& b, const Bitset& c) {
  const auto wa = a.words();
  const auto wb = b.words();
  const auto wc = c.words();
  std::size_t n = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) n += static_cast<std::size_t>(std::popcount(wa[i] & wb[i] & wc[i]));
  return n;
}

}  // namespace boa
