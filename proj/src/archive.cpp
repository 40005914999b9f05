#include "qfs/archive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qfs/errors.hpp"

namespace qfs {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::vector<char> encode_f32(const std::vector<float>& values) {
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto word = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((word >> (8 * b)) & 0xFFu);
  }
  return bytes;
}

std::vector<float> decode_f32(const std::vector<char>& bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t word = 0;
    for (int b = 0; b < 4; ++b) {
      word |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    }
    values[i] = std::bit_cast<float>(word);
  }
  return values;
}

bool all_finite(const std::vector<float>& values) {
  return std::all_of(values.begin(), values.end(), [](float v) { return std::isfinite(v); });
}

std::string blob_stem(std::size_t index, std::size_t count) {
  int width = 6;
  for (std::size_t n = count; n >= 1000000; n /= 10) ++width;
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << index;
  return os.str();
}

std::vector<float> read_blob(const fs::path& path, std::size_t expected, const std::string& id) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ArchiveError("missing blob " + path.filename().string(), id);
  auto size = fs::file_size(path, ec);
  if (ec || size != expected * 4) {
    throw ArchiveError("blob " + path.filename().string() + " has " + std::to_string(size) +
                           " bytes, expected " + std::to_string(expected * 4),
                       id);
  }
  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes(size);
  if (!in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    throw ArchiveError("cannot read blob " + path.filename().string(), id);
  }
  auto values = decode_f32(bytes);
  if (!all_finite(values)) throw ArchiveError("non-finite value in " + path.filename().string(), id);
  return values;
}

void write_blob(const fs::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  auto bytes = encode_f32(values);
  if (!out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw ArchiveError("cannot write " + path.string());
  }
}

}  // namespace

void FeatureArchive::validate() const {
  const auto& s = header.shape;
  if (header.num_classes < 1) throw ArchiveError("num_classes must be >= 1");
  if (s.nf < 1 || s.hf < 1 || s.wf < 1) throw ArchiveError("feature shape must be positive");
  if (header.record_count != records.size()) {
    throw ArchiveError("record_count " + std::to_string(header.record_count) + " but " +
                       std::to_string(records.size()) + " records present");
  }
  for (const auto& r : records) {
    if (r.class_label < 0 || r.class_label >= header.num_classes) {
      throw ArchiveError("class label out of range", r.image_id);
    }
    if (r.activations.size() != s.size() || r.gradients.size() != s.size()) {
      throw ArchiveError("tensor size does not match header shape", r.image_id);
    }
    if (!std::isfinite(r.score) || !all_finite(r.activations) || !all_finite(r.gradients)) {
      throw ArchiveError("non-finite value", r.image_id);
    }
  }
}

void SyntheticConfig::validate() const {
  if (num_classes < 1 || images_per_class < 1 || nf < 1 || hf < 1 || wf < 1) {
    throw std::invalid_argument("synthetic config: all integer fields must be >= 1");
  }
  if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("synthetic config: sparsity must lie in [0,1]");
  }
}

FeatureArchive read_archive(const fs::path& dir) {
  const auto manifest_path = dir / kManifestName;
  std::ifstream in(manifest_path);
  if (!in) throw ArchiveError("missing manifest " + manifest_path.string());

  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ArchiveError(std::string("manifest does not parse: ") + e.what());
  }

  FeatureArchive archive;
  try {
    auto& h = archive.header;
    h.version = manifest.at("version").get<int>();
    h.dataset_name = manifest.at("dataset_name").get<std::string>();
    h.num_classes = manifest.at("num_classes").get<int>();
    h.shape = {manifest.at("nf").get<int>(), manifest.at("hf").get<int>(), manifest.at("wf").get<int>()};
    h.record_count = manifest.at("record_count").get<std::size_t>();
    const auto& entries = manifest.at("records");
    if (h.shape.nf < 1 || h.shape.hf < 1 || h.shape.wf < 1) {
      throw ArchiveError("feature shape must be positive");
    }
    for (const auto& e : entries) {
      FeatureRecord r;
      r.image_id = e.at("id").get<std::string>();
      r.class_label = e.at("class").get<int>();
      r.score = e.at("score").get<double>();
      r.activations = read_blob(dir / e.at("activations_file").get<std::string>(), h.shape.size(), r.image_id);
      r.gradients = read_blob(dir / e.at("gradients_file").get<std::string>(), h.shape.size(), r.image_id);
      archive.records.push_back(std::move(r));
    }
    if (entries.size() != h.record_count) {
      throw ArchiveError("manifest declares " + std::to_string(h.record_count) + " records but lists " +
                         std::to_string(entries.size()));
    }
  } catch (const json::exception& e) {
    throw ArchiveError(std::string("malformed manifest: ") + e.what());
  }
  archive.validate();
  return archive;
}

void write_archive(const FeatureArchive& archive, const fs::path& dir) {
  archive.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ArchiveError("cannot create " + dir.string() + ": " + ec.message());

  const auto& h = archive.header;
  json records = json::array();
  for (std::size_t i = 0; i < archive.records.size(); ++i) {
    const auto& r = archive.records[i];
    const auto stem = blob_stem(i, archive.records.size());
    const auto act = stem + ".act.f32";
    const auto grad = stem + ".grad.f32";
    write_blob(dir / act, r.activations);
    write_blob(dir / grad, r.gradients);
    records.push_back({{"id", r.image_id},
                       {"class", r.class_label},
                       {"score", r.score},
                       {"activations_file", act},
                       {"gradients_file", grad}});
  }
  json manifest = {{"version", h.version},     {"dataset_name", h.dataset_name},
                   {"num_classes", h.num_classes}, {"nf", h.shape.nf},
                   {"hf", h.shape.hf},         {"wf", h.shape.wf},
                   {"record_count", h.record_count}, {"records", records}};
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw ArchiveError("cannot write manifest in " + dir.string());
}

std::vector<std::vector<int>> signature_sets(const SyntheticConfig& config) {
  config.validate();
  const int width = std::max(1, config.nf / config.num_classes);
  std::vector<std::vector<int>> sets(config.num_classes);
  for (int c = 0; c < config.num_classes; ++c) {
    for (int j = 0; j < width; ++j) sets[c].push_back((c * width + j) % config.nf);
    std::sort(sets[c].begin(), sets[c].end());
    sets[c].erase(std::unique(sets[c].begin(), sets[c].end()), sets[c].end());
  }
  return sets;
}

FeatureArchive gen_synthetic(const SyntheticConfig& config) {
  const auto signatures = signature_sets(config);
  const FeatureShape shape{config.nf, config.hf, config.wf};
  const auto plane = shape.plane();

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Per-map spatial templates: a narrow Gaussian bump per map, centres spread
  // over the plane by best-candidate sampling so distinct maps overlap little.
  struct Bump {
    double ci, cj;
  };
  std::vector<Bump> centres;
  for (int a = 0; a < config.nf; ++a) {
    Bump best{};
    double best_gap = -1.0;
    for (int trial = 0; trial < 24; ++trial) {
      const Bump cand{unit(rng) * (config.hf - 1), unit(rng) * (config.wf - 1)};
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& b : centres) gap = std::min(gap, std::hypot(cand.ci - b.ci, cand.cj - b.cj));
      if (gap > best_gap) {
        best_gap = gap;
        best = cand;
      }
    }
    centres.push_back(best);
  }
  const double width = std::max(0.45, std::min(config.hf, config.wf) / 14.0);

  auto bump = [&](const Bump& b, double di, double dj, std::vector<double>& out, double amp) {
    for (int i = 0; i < config.hf; ++i) {
      for (int j = 0; j < config.wf; ++j) {
        const double y = i - (b.ci + di), x = j - (b.cj + dj);
        out[i * config.wf + j] += amp * std::exp(-(x * x + y * y) / (2 * width * width));
      }
    }
  };

  FeatureArchive archive;
  archive.header.dataset_name = "synthetic";
  archive.header.num_classes = config.num_classes;
  archive.header.shape = shape;

  for (int c = 0; c < config.num_classes; ++c) {
    std::vector<bool> is_signature(config.nf, false);
    for (int a : signatures[c]) is_signature[a] = true;

    for (int n = 0; n < config.images_per_class; ++n) {
      FeatureRecord r;
      r.image_id = "c" + std::to_string(c) + "_i" + std::to_string(n);
      r.class_label = c;
      r.activations.resize(shape.size());
      r.gradients.resize(shape.size());

      // Class evidence: the signature bumps of this image, jittered.
      std::vector<double> evidence(plane, 0.0);
      std::vector<std::vector<double>> maps(config.nf, std::vector<double>(plane, 0.0));
      for (int a : signatures[c]) {
        const double amp = 0.8 + 0.4 * unit(rng);
        const double di = 0.5 * (unit(rng) - 0.5), dj = 0.5 * (unit(rng) - 0.5);
        bump(centres[a], di, dj, maps[a], amp);
        bump(centres[a], di, dj, evidence, amp);
      }
      for (int a = 0; a < config.nf; ++a) {
        if (is_signature[a]) continue;
        const double mix = 0.4 + 0.4 * unit(rng);
        for (std::size_t k = 0; k < plane; ++k) maps[a][k] = mix * evidence[k];
        bump(centres[a], 0.0, 0.0, maps[a], 0.15);
      }

      double score = 0.0;
      for (int a = 0; a < config.nf; ++a) {
        double mean_f = 0.0, mean_g = 0.0;
        const bool silent = !is_signature[a] && unit(rng) < config.sparsity;
        const double grad_mean = is_signature[a] ? 0.7 + 0.3 * unit(rng) : -0.15 + 0.15 * normal(rng);
        for (std::size_t k = 0; k < plane; ++k) {
          const double f = maps[a][k] + std::abs(0.01 * normal(rng));
          const double g = silent ? 0.0 : grad_mean + 0.1 * normal(rng);
          r.activations[a * plane + k] = static_cast<float>(f);
          r.gradients[a * plane + k] = static_cast<float>(g);
          mean_f += r.activations[a * plane + k];
          mean_g += r.gradients[a * plane + k];
        }
        score += (mean_f / plane) * (mean_g / plane);
      }
      r.score = score;
      archive.records.push_back(std::move(r));
    }
  }
  archive.header.record_count = archive.records.size();
  return archive;
}

}  // namespace qfs
