#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "qfs/annealer.hpp"
#include "qfs/eigensolver.hpp"
#include "qfs/qubo.hpp"

namespace qfs {

/// k lowest eigenpairs of H(s) = (1-s) H_D + s H_QUBO, matrix-free. At s = 1
/// the operator is diagonal and the sorted classical energies are returned
/// exactly. Throws ConvergenceError if the iteration stalls.
LowestEigenpairs low_spectrum(const QuboInstance& instance, double s, int k,
                              const EigensolverOptions& options = {},
                              std::span<const std::vector<double>> guesses = {});

/// Two lowest levels of H(s) on s = 0, ds, ..., 1.
struct SpectrumTrace {
  std::vector<double> s_grid;
  std::vector<double> e0;
  std::vector<double> e1;
  double delta_min = 0.0;  // min of e1 - e0, exact ties give 0
  double s_min = 0.0;      // earliest grid point attaining delta_min
  int ground_degeneracy_at_end = 1;
};

SpectrumTrace gap_trace(const QuboInstance& instance, const AnnealSchedule& schedule,
                        const EigensolverOptions& options = {});

struct GapFidelityPoint {
  double delta = 0.0;
  double fidelity = 0.0;
};

/// F = 1 - exp(-lambda * delta^2), fitted on -ln(1-F) = lambda delta^2 with
/// weights (1-F)^2. Points with F >= 1 - 1e-12 carry no information and are
/// dropped. `residual` is the RMS misfit in F.
struct LandauZenerFit {
  double lambda = 0.0;
  double residual = 0.0;
  int points_used = 0;
};

LandauZenerFit fit_landau_zener(std::span<const GapFidelityPoint> points);

/// F = intercept + slope * delta by ordinary least squares over the same
/// points the Landau-Zener fit keeps. Baseline for model comparison.
struct LinearGapFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

LinearGapFit fit_linear_gap(std::span<const GapFidelityPoint> points);

/// log(mean delta_min) = intercept + exponent * log d.
struct GapScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::map<int, double> per_d_means;
  std::map<int, std::pair<double, double>> per_d_quartiles;  // (Q1, Q3)
  std::map<int, double> hardest_instances;                    // smallest delta per d
  std::vector<int> excluded_d;                                // fewer than 3 samples
};

GapScalingFit fit_gap_scaling(const std::map<int, std::vector<double>>& samples);

/// Linear-interpolation quantile of unsorted data, q in [0,1].
double quantile(std::vector<double> values, double q);

}  // namespace qfs
