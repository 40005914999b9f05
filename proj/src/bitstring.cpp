#include "qfs/bitstring.hpp"

#include <stdexcept>

namespace qfs {

std::string to_string(const Bitstring& bits) {
  std::string out(bits.size(), '0');
  for (std::size_t p = 0; p < bits.size(); ++p) {
    if (bits[p]) out[p] = '1';
  }
  return out;
}

Bitstring bitstring_from_string(std::string_view text) {
  Bitstring bits(text.size());
  for (std::size_t p = 0; p < text.size(); ++p) {
    if (text[p] != '0' && text[p] != '1') {
      throw std::invalid_argument("bitstring may only contain '0' and '1': " + std::string(text));
    }
    bits[p] = text[p] == '1';
  }
  return bits;
}

std::uint64_t basis_index(const Bitstring& bits) {
  if (bits.size() > 63) throw std::invalid_argument("bitstring too long for a basis index");
  std::uint64_t index = 0;
  for (auto b : bits) index = (index << 1) | (b ? 1u : 0u);
  return index;
}

Bitstring bitstring_from_index(std::uint64_t index, int d) {
  Bitstring bits(static_cast<std::size_t>(d));
  for (int p = 0; p < d; ++p) bits[p] = (index & variable_mask(p, d)) ? 1 : 0;
  return bits;
}

Bitstring histogram_mode(const Histogram& histogram) {
  const Bitstring* best = nullptr;
  std::int64_t best_count = -1;
  for (const auto& [bits, count] : histogram) {
    if (count > best_count) {
      best = &bits;
      best_count = count;
    }
  }
  return best ? *best : Bitstring{};
}

}  // namespace qfs
