#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace qfs::testing {

FeatureRecord random_record(std::mt19937_64& rng, int d, int h, int w) {
  const FeatureShape shape{d, h, w};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> mean(0.05, 1.0);
  FeatureRecord record;
  record.image_id = "rand";
  record.activations.resize(shape.size());
  record.gradients.resize(shape.size());
  for (auto& v : record.activations) v = static_cast<float>(std::max(0.0, normal(rng)));
  for (int a = 0; a < d; ++a) {
    const double m = mean(rng);
    // Zero-mean perturbation around m keeps the spatial mean positive.
    std::vector<double> noise(shape.plane());
    double avg = 0.0;
    for (auto& n : noise) avg += (n = 0.2 * normal(rng));
    avg /= static_cast<double>(noise.size());
    for (std::size_t k = 0; k < noise.size(); ++k)
      record.gradients[a * shape.plane() + k] = static_cast<float>(m + noise[k] - avg);
  }
  // A map that came out all zero stays valid: its couplings are zero.
  return record;
}

QuboInstance random_instance(std::mt19937_64& rng, int d, double beta) {
  const int h = 4, w = 4;
  return build_qubo(random_record(rng, d, h, w), FeatureShape{d, h, w}, beta);
}

std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (auto& v : p) {
    v = u(rng) < 0.2 ? 0.0 : u(rng);
    total += v;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& v : p) v /= total;
  return p;
}

std::vector<std::complex<double>> random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> psi(std::size_t{1} << d);
  double norm = 0.0;
  for (auto& a : psi) {
    a = {normal(rng), normal(rng)};
    norm += std::norm(a);
  }
  for (auto& a : psi) a /= std::sqrt(norm);
  return psi;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("qfs_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace qfs::testing
