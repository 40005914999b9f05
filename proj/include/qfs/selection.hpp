#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfs/bitstring.hpp"

namespace qfs {

enum class SolveMethod { Qa, Sa, Exact };

std::string to_string(SolveMethod method);
SolveMethod solve_method_from_string(const std::string& text);

/// Outcome of solving one image's QUBO, mapped back to feature-map indices.
struct SelectionResult {
  std::string image_id;
  int class_label = 0;
  SolveMethod method = SolveMethod::Exact;
  Bitstring bitstring;
  std::vector<int> selected_fm_indices;
  double energy = 0.0;
  Histogram histogram;
  std::int64_t n_shots = 0;
  /// Overlap with the classical ground space (quantum runs only).
  std::optional<double> fidelity;
  /// Exact solver: number of minimizing assignments.
  std::optional<std::uint64_t> degeneracy;
  /// Provenance note, e.g. a method fallback.
  std::string note;

  bool operator==(const SelectionResult&) const = default;
};

std::string to_json_line(const SelectionResult& result);
SelectionResult selection_from_json_line(const std::string& line);
void write_selection_file(std::span<const SelectionResult> results, const std::filesystem::path& path);
std::vector<SelectionResult> read_selection_file(const std::filesystem::path& path);

}  // namespace qfs
