#include "qfs/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qfs/errors.hpp"

namespace qfs {

LowestEigenpairs low_spectrum(const QuboInstance& instance, double s, int k, const EigensolverOptions& options,
                              std::span<const std::vector<double>> guesses) {
  if (instance.d < 1 || instance.d > kMaxEvolutionQubits) {
    throw CapacityError("spectrum: d = " + std::to_string(instance.d) + " outside [1, " +
                        std::to_string(kMaxEvolutionQubits) + "]");
  }
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("spectrum: s must lie in [0,1]");
  const auto diag = diagonal_energies(instance);
  const std::size_t dim = diag.size();
  if (k < 1 || static_cast<std::size_t>(k) > dim) throw std::invalid_argument("spectrum: need 1 <= k <= 2^d");

  const double a = 1.0 - s, b = s;
  if (a == 0.0) {
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t x, std::size_t y) { return diag[x] < diag[y] || (diag[x] == diag[y] && x < y); });
    LowestEigenpairs out;
    out.converged = true;
    out.residuals.assign(k, 0.0);
    for (int j = 0; j < k; ++j) {
      out.values.push_back(diag[order[j]]);
      std::vector<double> v(dim, 0.0);
      v[order[j]] = 1.0;
      out.vectors.push_back(std::move(v));
    }
    return out;
  }

  const int d = instance.d;
  LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    apply_annealing_hamiltonian<double>(d, diag, a, b, x, y);
  };
  auto result = lowest_eigenpairs(op, dim, k, options, guesses);
  if (!result.converged) {
    throw ConvergenceError("low_spectrum did not converge at s = " + std::to_string(s),
                           *std::max_element(result.residuals.begin(), result.residuals.end()));
  }
  return result;
}

SpectrumTrace gap_trace(const QuboInstance& instance, const AnnealSchedule& schedule,
                        const EigensolverOptions& options) {
  schedule.validate();
  const int n = schedule.steps();
  const int k = instance.d >= 1 ? 2 : 1;
  SpectrumTrace trace;
  std::vector<std::vector<double>> warm;
  for (int i = 0; i <= n; ++i) {
    const double s = i == n ? 1.0 : i * schedule.ds;
    auto spec = low_spectrum(instance, s, k, options, warm);
    if (i < n) warm = std::move(spec.vectors);
    trace.s_grid.push_back(s);
    trace.e0.push_back(spec.values[0]);
    trace.e1.push_back(std::max(spec.values[1], spec.values[0]));
  }
  trace.delta_min = trace.e1[0] - trace.e0[0];
  trace.s_min = trace.s_grid[0];
  for (std::size_t i = 1; i < trace.s_grid.size(); ++i) {
    const double gap = trace.e1[i] - trace.e0[i];
    if (gap < trace.delta_min) {
      trace.delta_min = gap;
      trace.s_min = trace.s_grid[i];
    }
  }
  const auto diag = diagonal_energies(instance);
  const double e_min = *std::min_element(diag.begin(), diag.end());
  trace.ground_degeneracy_at_end =
      static_cast<int>(std::count_if(diag.begin(), diag.end(), [&](double e) { return e <= e_min + 1e-10; }));
  return trace;
}

namespace {

constexpr double kSaturated = 1.0 - 1e-12;

std::vector<GapFidelityPoint> informative_points(std::span<const GapFidelityPoint> points) {
  if (points.size() < 3) throw std::invalid_argument("Landau-Zener fit needs at least 3 points");
  std::vector<GapFidelityPoint> kept;
  for (const auto& p : points) {
    if (!(p.fidelity >= 0.0 && p.fidelity <= 1.0) || !std::isfinite(p.delta)) {
      throw std::invalid_argument("Landau-Zener fit: fidelity must lie in [0,1]");
    }
    if (p.fidelity < kSaturated) kept.push_back(p);
  }
  if (kept.empty()) throw std::invalid_argument("Landau-Zener fit: every point is saturated (F ~ 1)");
  return kept;
}

}  // namespace

LandauZenerFit fit_landau_zener(std::span<const GapFidelityPoint> points) {
  const auto kept = informative_points(points);
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : kept) {
    const double x = p.delta * p.delta;
    const double y = -std::log1p(-p.fidelity);
    const double w = (1.0 - p.fidelity) * (1.0 - p.fidelity);
    sxy += w * x * y;
    sxx += w * x * x;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("Landau-Zener fit is degenerate (all gaps zero)");
  LandauZenerFit fit;
  fit.lambda = std::max(0.0, sxy / sxx);
  fit.points_used = static_cast<int>(kept.size());
  double ss = 0.0;
  for (const auto& p : kept) {
    const double model = -std::expm1(-fit.lambda * p.delta * p.delta);
    ss += (p.fidelity - model) * (p.fidelity - model);
  }
  fit.residual = std::sqrt(ss / kept.size());
  return fit;
}

LinearGapFit fit_linear_gap(std::span<const GapFidelityPoint> points) {
  const auto kept = informative_points(points);
  const double n = static_cast<double>(kept.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : kept) {
    mx += p.delta / n;
    my += p.fidelity / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : kept) {
    sxy += (p.delta - mx) * (p.fidelity - my);
    sxx += (p.delta - mx) * (p.delta - mx);
  }
  LinearGapFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (const auto& p : kept) {
    const double r = p.fidelity - (fit.intercept + fit.slope * p.delta);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

GapScalingFit fit_gap_scaling(const std::map<int, std::vector<double>>& samples) {
  GapScalingFit fit;
  std::vector<double> xs, ys;
  for (const auto& [d, deltas] : samples) {
    if (deltas.size() < 3 || d < 1) {
      fit.excluded_d.push_back(d);
      continue;
    }
    const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
    fit.per_d_means[d] = mean;
    fit.per_d_quartiles[d] = {quantile(deltas, 0.25), quantile(deltas, 0.75)};
    fit.hardest_instances[d] = *std::min_element(deltas.begin(), deltas.end());
    if (!(mean > 0.0)) throw std::invalid_argument("gap scaling: mean gap at d = " + std::to_string(d) + " is zero");
    xs.push_back(std::log(static_cast<double>(d)));
    ys.push_back(std::log(mean));
  }
  if (xs.size() < 2) throw std::invalid_argument("gap scaling needs >= 2 dimensions with >= 3 samples each");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  return fit;
}

}  // namespace qfs
