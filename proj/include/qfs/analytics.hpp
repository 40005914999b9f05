#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qfs/archive.hpp"
#include "qfs/qubo.hpp"
#include "qfs/selection.hpp"

namespace qfs {

/// How often each feature map is selected across the images of one class,
/// counting each selected map once per image.
struct ClassDistribution {
  int class_label = 0;
  std::vector<double> p;         // length nf, sums to 1 unless empty
  std::int64_t support_count = 0;  // total selection events
  std::int64_t image_count = 0;

  bool empty() const { return support_count == 0; }
};

std::vector<ClassDistribution> class_distributions(std::span<const SelectionResult> selections, int num_classes,
                                                   int nf);

/// sum_a sqrt(p_a q_a).
double bhattacharyya(std::span<const double> p, std::span<const double> q);

/// Class-class Bhattacharyya overlaps. Raw values are kept; display() zeroes
/// entries below the threshold. Rows of empty classes are all zero.
struct CorrelationMatrix {
  int num_classes = 0;
  std::vector<double> bc;
  std::vector<bool> empty_class;
  double display_threshold = 0.10;

  double operator()(int a, int b) const { return bc[static_cast<std::size_t>(a) * num_classes + b]; }
  double display(int a, int b) const {
    const double v = (*this)(a, b);
    return v < display_threshold ? 0.0 : v;
  }
};

CorrelationMatrix correlation_matrix(std::span<const ClassDistribution> distributions, double display_threshold = 0.10);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
};

/// Gaussian moment fit of off-diagonal couplings plus a Freedman-Diaconis
/// histogram.
struct CouplingDistributionFit {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  std::vector<HistogramBin> histogram;
};

/// Strict upper triangle of J, the diagonal is never included.
std::vector<double> off_diagonal_couplings(const QuboInstance& instance);

CouplingDistributionFit fit_j_distribution(std::span<const double> couplings);

/// Heat map of the selected maps: max(0, sum_{a selected} alpha_a f_a),
/// normalized by its maximum, optionally bilinearly resized.
struct ExplanationMap {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<double> heat;
  int up_height = 0;
  int up_width = 0;
  std::vector<double> upsampled;
  bool all_zero = true;
};

ExplanationMap heatmap(const FeatureRecord& record, const FeatureShape& shape, std::span<const double> alpha,
                       const SelectionResult& selection, std::optional<std::pair<int, int>> upsample_to = {});

/// Bilinear resize with half-pixel centres and edge clamping.
std::vector<double> bilinear_resize(std::span<const double> src, int h, int w, int out_h, int out_w);

/// 8-bit binary PGM, value round(255 * heat).
void write_pgm(std::span<const double> values, int height, int width, const std::filesystem::path& path);
void write_matrix_csv(std::span<const double> values, int height, int width, const std::filesystem::path& path);

}  // namespace qfs
