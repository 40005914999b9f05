#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qfs/qubo.hpp"
#include "qfs/selection.hpp"

namespace qfs {

inline constexpr int kMaxBruteForceVariables = 24;

struct BruteForceResult {
  SelectionResult selection;         // canonical (lowest numeric) minimizer
  std::uint64_t degeneracy = 0;      // assignments within 1e-10 of the minimum
  std::vector<Bitstring> ties;       // first 16 minimizers in numeric order
  std::optional<double> next_energy; // lowest energy above the ground level
};

/// Exhaustive minimization over all 2^d assignments (d <= 24).
BruteForceResult brute_force(const QuboInstance& instance);

/// Metropolis single-spin-flip annealing over a linear inverse-temperature ramp.
struct SaParams {
  int num_reads = 1000;
  int num_sweeps = 1000;
  int sweeps_per_beta = 1;
  /// Inverse-temperature endpoints (not the QUBO beta). Empty: auto range
  /// (0.1, 10) / max(max h, max J).
  std::optional<std::pair<double, double>> beta_range;
  std::uint64_t seed = 0;

  void validate() const;
};

std::pair<double, double> default_beta_range(const QuboInstance& instance);

/// Best energy over independent reads; the histogram holds each read's final
/// state. Read r draws from a stream seeded by (seed, r).
SelectionResult simulated_anneal(const QuboInstance& instance, const SaParams& params);

}  // namespace qfs
