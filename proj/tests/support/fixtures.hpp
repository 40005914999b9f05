#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "qfs/archive.hpp"
#include "qfs/qubo.hpp"

namespace qfs::testing {

/// Record with exactly d positively contributing maps of h x w cells.
/// Activations are rectified Gaussians, gradients have strictly positive
/// channel means drawn from U(0.05, 1).
FeatureRecord random_record(std::mt19937_64& rng, int d, int h = 4, int w = 4);

/// Instance of size d built through the regular importance -> filter ->
/// cosine path from random_record.
QuboInstance random_instance(std::mt19937_64& rng, int d, double beta = kDefaultBeta);

/// Random probability vector of length n with some exact zeros.
std::vector<double> random_distribution(std::mt19937_64& rng, int n);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

/// Random unit-norm complex state on d qubits.
std::vector<std::complex<double>> random_state(std::mt19937_64& rng, int d);

}  // namespace qfs::testing
