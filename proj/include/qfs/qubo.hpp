#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qfs/archive.hpp"
#include "qfs/bitstring.hpp"

namespace qfs {

/// Importance of every feature map and its restriction to the positive ones.
struct ImportanceVector {
  std::vector<double> alpha;            // spatial mean of the gradient, length nf
  std::vector<int> filtered_indices;    // maps with alpha > 0, increasing
  std::vector<double> alpha_filtered;   // alpha restricted to filtered_indices
  std::vector<double> h;                // alpha_filtered / max(alpha_filtered)

  int d() const { return static_cast<int>(filtered_indices.size()); }
};

/// Symmetric d x d redundancy couplings with zero diagonal, entries in [0,1].
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(int d) : d_(d), values_(static_cast<std::size_t>(d) * d, 0.0) {}

  int d() const { return d_; }
  double operator()(int p, int q) const { return values_[static_cast<std::size_t>(p) * d_ + q]; }
  /// Sets both (p,q) and (q,p).
  void set(int p, int q, double v) {
    values_[static_cast<std::size_t>(p) * d_ + q] = v;
    values_[static_cast<std::size_t>(q) * d_ + p] = v;
  }
  std::span<const double> row(int p) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(p) * d_, d_);
  }

  /// Row-major strict upper triangle, the serialized form.
  std::vector<double> upper_triangle() const;
  static SimilarityMatrix from_upper_triangle(int d, std::span<const double> upper);

  bool operator==(const SimilarityMatrix&) const = default;

 private:
  int d_ = 0;
  std::vector<double> values_;
};

/// Feature-selection QUBO for one image. Minimizes
///   E(z) = (1 - beta) * sum_{p<q} J_pq z_p z_q  -  beta * sum_p h_p z_p.
/// The linear term rewards selection: beta = 1 selects every positive map and
/// beta = 0 selects none.
struct QuboInstance {
  int d = 0;
  SimilarityMatrix J;
  std::vector<double> h;
  double beta = 0.7;
  std::vector<int> index_map;  // variable p -> original feature-map index
  std::string image_id;
  int class_label = 0;

  void validate() const;
  bool operator==(const QuboInstance&) const = default;
};

inline constexpr double kDefaultBeta = 0.7;

/// Filtered maps of one record plus their importance.
struct FilteredFeatures {
  ImportanceVector importance;
  std::vector<std::vector<double>> maps;  // d maps of hf*wf cells
};

/// alpha_a = mean over cells of the gradient channel a.
std::vector<double> importance(const FeatureRecord& record, const FeatureShape& shape);

/// Keeps channels with alpha strictly positive; throws EmptySelection if none.
FilteredFeatures filter_positive(const FeatureRecord& record, const FeatureShape& shape,
                                 std::vector<double> alpha);

/// Absolute cosine similarity between every pair of maps; zero-norm maps are
/// dissimilar to everything.
SimilarityMatrix cosine_matrix(std::span<const std::vector<double>> maps);

QuboInstance assemble_qubo(SimilarityMatrix J, std::vector<double> h, double beta,
                           std::vector<int> index_map);

/// Full chain importance -> filter -> couplings -> instance.
QuboInstance build_qubo(const FeatureRecord& record, const FeatureShape& shape, double beta);

/// Classical energy of an assignment, evaluated directly from the definition.
double energy(const QuboInstance& instance, const Bitstring& z);

/// Original feature-map indices switched on by `z`.
std::vector<int> selected_indices(const QuboInstance& instance, const Bitstring& z);

/// One JSON document per line: {image_id, class, d, beta, index_map, h, J_upper}.
std::string to_json_line(const QuboInstance& instance);
QuboInstance qubo_from_json_line(const std::string& line);
void write_qubo_file(std::span<const QuboInstance> instances, const std::filesystem::path& path);
std::vector<QuboInstance> read_qubo_file(const std::filesystem::path& path);

}  // namespace qfs
