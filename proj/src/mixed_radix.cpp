#include "idmilp/mixed_radix.hpp"

#include <limits>
#include <stdexcept>

namespace idmilp {

MixedRadix::MixedRadix(std::vector<int> radices) : radices_(std::move(radices)) {
  strides_.assign(radices_.size(), 1);
  std::uint64_t stride = 1;
  for (std::size_t i = radices_.size(); i-- > 0;) {
    if (radices_[i] < 0) throw std::invalid_argument("negative radix");
    strides_[i] = stride;
    const auto r = static_cast<std::uint64_t>(radices_[i]);
    if (r != 0 && stride > std::numeric_limits<std::uint64_t>::max() / r)
      throw std::overflow_error("mixed-radix size exceeds 64 bits");
    stride *= r;
  }
  size_ = stride;
}

std::uint64_t MixedRadix::index(std::span<const int> digits) const {
  std::uint64_t result = 0;
  for (std::size_t i = 0; i < radices_.size(); ++i)
    result += static_cast<std::uint64_t>(digits[i]) * strides_[i];
  return result;
}

void MixedRadix::decode(std::uint64_t index, std::span<int> digits) const {
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    digits[i] = static_cast<int>(index / strides_[i]);
    index %= strides_[i];
  }
}

bool MixedRadix::increment(std::span<int> digits) const {
  for (std::size_t i = radices_.size(); i-- > 0;) {
    if (++digits[i] < radices_[i]) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace idmilp
