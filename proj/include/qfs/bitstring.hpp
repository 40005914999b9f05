#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qfs {

/// Assignment z in {0,1}^d. Entry p is the occupation of variable p.
///
/// Basis-state convention used throughout: variable 0 is the most significant
/// bit of the basis index, so the printed string "z0 z1 ... z_{d-1}", its
/// lexicographic order and its numeric value all agree.
using Bitstring = std::vector<std::uint8_t>;

/// Counts per observed bitstring. Ordered so that ties resolve to the lowest
/// numeric bitstring by taking the first maximal entry.
using Histogram = std::map<Bitstring, std::int64_t>;

std::string to_string(const Bitstring& bits);
Bitstring bitstring_from_string(std::string_view text);

/// Basis index of `bits` (d <= 63).
std::uint64_t basis_index(const Bitstring& bits);
Bitstring bitstring_from_index(std::uint64_t index, int d);

/// Bit mask acting on variable p inside a d-variable basis index.
inline std::uint64_t variable_mask(int p, int d) { return std::uint64_t{1} << (d - 1 - p); }

/// Most frequent bitstring, lowest numeric value on ties. Empty histogram
/// yields an empty bitstring.
Bitstring histogram_mode(const Histogram& histogram);

}  // namespace qfs
