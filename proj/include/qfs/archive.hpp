#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qfs {

/// Shape of the feature-map tensor of one image: nf maps of hf x wf cells,
/// stored row-major with the map index slowest.
struct FeatureShape {
  int nf = 0;
  int hf = 0;
  int wf = 0;

  std::size_t plane() const { return static_cast<std::size_t>(hf) * static_cast<std::size_t>(wf); }
  std::size_t size() const { return static_cast<std::size_t>(nf) * plane(); }
  bool operator==(const FeatureShape&) const = default;
};

struct ArchiveHeader {
  int version = 1;
  std::string dataset_name;
  int num_classes = 1;
  FeatureShape shape;
  std::size_t record_count = 0;

  bool operator==(const ArchiveHeader&) const = default;
};

/// Activations and gradients of the target-class score for one image.
struct FeatureRecord {
  std::string image_id;
  int class_label = 0;
  double score = 0.0;
  std::vector<float> activations;  // [nf][hf][wf]
  std::vector<float> gradients;    // d score / d activation, same layout

  std::span<const float> activation_map(int a, const FeatureShape& shape) const {
    return std::span<const float>(activations).subspan(a * shape.plane(), shape.plane());
  }
  std::span<const float> gradient_map(int a, const FeatureShape& shape) const {
    return std::span<const float>(gradients).subspan(a * shape.plane(), shape.plane());
  }

  bool operator==(const FeatureRecord&) const = default;
};

struct FeatureArchive {
  ArchiveHeader header;
  std::vector<FeatureRecord> records;

  const FeatureShape& shape() const { return header.shape; }

  /// Throws ArchiveError when a header or record invariant is broken.
  void validate() const;

  bool operator==(const FeatureArchive&) const = default;
};

/// Parameters of the synthetic archive generator.
struct SyntheticConfig {
  int num_classes = 2;
  int images_per_class = 20;
  int nf = 16;
  int hf = 7;
  int wf = 7;
  /// Probability that a non-signature gradient channel is exactly zero.
  double sparsity = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Loads an archive directory. Blob sizes, finiteness and the record count are
/// checked against the manifest; failures name the offending record.
FeatureArchive read_archive(const std::filesystem::path& dir);

/// Writes manifest.json plus one little-endian float32 activation blob and one
/// gradient blob per record. Output is a pure function of the archive.
void write_archive(const FeatureArchive& archive, const std::filesystem::path& dir);

/// Deterministic synthetic archive with recoverable ground truth: every class
/// owns a set of "signature" feature maps (see signature_sets) whose
/// activations are localized and whose gradients are clearly positive. The
/// remaining maps are redundant mixtures of the signature maps with weak,
/// mostly negative gradients.
FeatureArchive gen_synthetic(const SyntheticConfig& config);

/// Signature feature-map indices of each class used by gen_synthetic.
/// Class c owns the contiguous block [c*w, c*w + w) modulo nf, w = max(1, nf/K).
std::vector<std::vector<int>> signature_sets(const SyntheticConfig& config);

}  // namespace qfs
