#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfs/analytics.hpp"
#include "qfs/annealer.hpp"
#include "qfs/selection.hpp"
#include "qfs/solvers.hpp"

namespace qfs {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path archive_path;
  double beta = kDefaultBeta;
  /// Annealing times; the first one produces the reported selections, all of
  /// them enter the fidelity tables.
  std::vector<double> taus{50.0};
  double ds = 0.01;
  std::optional<std::int64_t> shots;  // empty: d^2 per image
  SolveMethod method = SolveMethod::Qa;
  EvolutionMethod evolution = EvolutionMethod::Trotter2;
  Readout readout = Readout::HistogramMode;
  SaParams sa;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty: nothing written
  int threads = 1;
  bool compute_spectrum = true;
  int spectrum_max_d = 12;
  double display_threshold = 0.10;

  void validate() const;
};

enum class ImageStatus { Ok, Skipped, Failed };

struct ImageOutcome {
  std::size_t record_index = 0;
  std::string image_id;
  int class_label = 0;
  ImageStatus status = ImageStatus::Ok;
  std::string message;
  int d = 0;
  std::optional<SelectionResult> selection;
  std::optional<double> delta_min;
  std::optional<double> s_min;
  std::optional<int> ground_degeneracy;
  std::vector<std::optional<double>> fidelity_by_tau;  // aligned with config.taus
};

struct RunManifest {
  PipelineConfig config;
  std::vector<ImageOutcome> images;  // one per archive record, in record order
  std::vector<QuboInstance> instances;
  std::size_t ok = 0, skipped = 0, failed = 0;
  std::optional<CorrelationMatrix> correlation;
  std::optional<CouplingDistributionFit> couplings;
};

/// Seed of item `index` inside a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Archive -> QUBO -> solver -> aggregates for every record. Per-image errors
/// are recorded and never abort the batch. Output is deterministic in the
/// config, independent of the thread count.
RunManifest run_pipeline(const PipelineConfig& config);
RunManifest run_pipeline(const PipelineConfig& config, const FeatureArchive& archive);

/// Writes manifest.json, qubo.jsonl, selections.jsonl and the CSV/SVG reports.
void write_run_outputs(const RunManifest& run, const std::filesystem::path& dir);

/// gaps.csv, gap_cumulative.csv and gap_histogram.svg for every image with a
/// spectrum summary.
void write_gap_reports(std::span<const ImageOutcome> images, const std::filesystem::path& dir);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace qfs
