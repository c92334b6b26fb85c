#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace idmilp {

/// Mixed-radix positional system with the last digit varying fastest.
///
/// Every table in the library (information states, paths, observable
/// segments) is linearized with this one convention.
class MixedRadix {
 public:
  MixedRadix() = default;
  explicit MixedRadix(std::vector<int> radices);

  std::size_t digits() const { return radices_.size(); }
  int radix(std::size_t i) const { return radices_[i]; }
  std::span<const int> radices() const { return radices_; }
  std::uint64_t stride(std::size_t i) const { return strides_[i]; }

  /// Number of representable tuples. Empty radix list has size 1.
  std::uint64_t size() const { return size_; }

  std::uint64_t index(std::span<const int> digits) const;
  void decode(std::uint64_t index, std::span<int> digits) const;

  /// Advances `digits` in place. Returns false after wrapping back to zero.
  bool increment(std::span<int> digits) const;

 private:
  std::vector<int> radices_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t size_ = 1;
};

/// Input range over every tuple of a MixedRadix, in index order.
class AssignmentRange {
 public:
  class iterator {
   public:
    using value_type = std::vector<int>;
    using difference_type = std::ptrdiff_t;
    using reference = const std::vector<int>&;
    using pointer = const std::vector<int>*;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    iterator(const MixedRadix* radix, bool done)
        : radix_(radix), digits_(radix ? radix->digits() : 0, 0), done_(done) {}

    reference operator*() const { return digits_; }
    pointer operator->() const { return &digits_; }
    iterator& operator++() {
      if (!radix_->increment(digits_)) done_ = true;
      ++position_;
      return *this;
    }
    void operator++(int) { ++*this; }
    std::uint64_t position() const { return position_; }
    bool operator==(const iterator& other) const { return done_ == other.done_; }

   private:
    const MixedRadix* radix_ = nullptr;
    std::vector<int> digits_;
    std::uint64_t position_ = 0;
    bool done_ = true;
  };

  explicit AssignmentRange(MixedRadix radix) : radix_(std::move(radix)) {}

  iterator begin() const { return iterator(&radix_, radix_.size() == 0); }
  iterator end() const { return iterator(&radix_, true); }
  std::uint64_t size() const { return radix_.size(); }
  const MixedRadix& radix() const { return radix_; }

 private:
  MixedRadix radix_;
};

}  // namespace idmilp
