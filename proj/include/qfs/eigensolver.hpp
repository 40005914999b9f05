#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qfs {

/// y = A x for a real symmetric operator A.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct EigensolverOptions {
  /// Converged when ||A x - theta x|| <= tolerance * max(1, |theta|).
  double tolerance = 1e-10;
  /// 0 selects 5 * dim / k.
  int max_iterations = 0;
  /// Largest search space before a thick restart; 0 selects min(dim, 48).
  int max_basis = 0;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct LowestEigenpairs {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // unit norm
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

/// k lowest eigenpairs of a symmetric operator by a block Krylov (Davidson
/// without preconditioning) iteration with thick restart. The block of k
/// start vectors resolves eigenvalue multiplicities up to k. `guesses` seed
/// the block, e.g. with eigenvectors of a nearby operator.
LowestEigenpairs lowest_eigenpairs(const LinearOperator& op, std::size_t dim, int k,
                                   const EigensolverOptions& options = {},
                                   std::span<const std::vector<double>> guesses = {});

}  // namespace qfs
