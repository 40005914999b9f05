// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Everything runs on synthetic data.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "fixtures.hpp"
#include "qfs/analytics.hpp"
#include "qfs/annealer.hpp"
#include "qfs/archive.hpp"
#include "qfs/errors.hpp"
#include "qfs/pipeline.hpp"
#include "qfs/qubo.hpp"
#include "qfs/solvers.hpp"
#include "qfs/spectrum.hpp"

using namespace qfs;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Largest |norm - 1| seen by any evolution in the run.
double g_norm_error = 0.0;
std::size_t g_evolutions = 0;

QuantumState tracked_evolve(const QuboInstance& q, const AnnealSchedule& schedule, EvolutionMethod method) {
  auto state = evolve(q, schedule, method);
  g_norm_error = std::max(g_norm_error, std::abs(state.norm() - 1.0));
  ++g_evolutions;
  return state;
}

// QUBO instances built from generator archives, in a fixed order.
std::vector<QuboInstance> generator_instances(std::size_t count, int max_d, std::vector<int> nfs,
                                              const std::function<bool(const QuboInstance&)>& keep,
                                              std::uint64_t seed) {
  std::vector<QuboInstance> out;
  for (std::uint64_t round = 0; out.size() < count && round < 1000; ++round) {
    for (int nf : nfs) {
      SyntheticConfig cfg;
      cfg.num_classes = 2;
      cfg.images_per_class = 10;
      cfg.nf = nf;
      cfg.seed = seed + 7919 * round + nf;
      const auto archive = gen_synthetic(cfg);
      for (const auto& record : archive.records) {
        if (out.size() == count) return out;
        try {
          auto q = build_qubo(record, archive.shape(), kDefaultBeta);
          if (q.d <= max_d && keep(q)) out.push_back(std::move(q));
        } catch (const EmptySelection&) {
        }
      }
    }
  }
  return out;
}

bool nondegenerate(const QuboInstance& q) {
  const auto bf = brute_force(q);
  return bf.degeneracy == 1 && bf.next_energy && *bf.next_energy - bf.selection.energy > 1e-3;
}

Verdict qubo_limits() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(2, 12);
  int good = 0;
  const int total = 200;
  for (int i = 0; i < total; ++i) {
    auto q = testing::random_instance(rng, dim(rng));
    q.beta = 1.0;
    const auto ones = brute_force(q).selection.bitstring;
    q.beta = 0.0;
    const auto zeros = brute_force(q).selection.bitstring;
    const bool ok = std::all_of(ones.begin(), ones.end(), [](auto b) { return b == 1; }) &&
                    std::all_of(zeros.begin(), zeros.end(), [](auto b) { return b == 0; });
    good += ok ? 1 : 0;
  }
  const double t = seconds_since(t0);
  return {good == total && t < 10.0, fmt("%d/%d instances hit both limits, %.2fs (limit 10s)", good, total, t)};
}

Verdict oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto instances = generator_instances(200, 12, {8, 12, 16, 20}, nondegenerate, 202);
  int correct = 0;
  double fidelity_sum = 0.0;
  const AnnealSchedule schedule{50.0, 0.01};
  for (const auto& q : instances) {
    const auto state = tracked_evolve(q, schedule, EvolutionMethod::Trotter2);
    correct += argmax_probability(state) == brute_force(q).selection.bitstring ? 1 : 0;
    fidelity_sum += fidelity(state, q);
  }
  const double t = seconds_since(t0);
  const double n = static_cast<double>(instances.size());
  const double rate = correct / n, mean_f = fidelity_sum / n;
  int max_d = 0;
  for (const auto& q : instances) max_d = std::max(max_d, q.d);
  return {instances.size() == 200 && rate >= 0.95 && mean_f >= 0.9 && t < 120.0,
          fmt("%d/%zu argmax = ground state (%.1f%%, need 95%%), mean fidelity %.4f (need 0.9), d up to %d, "
              "%.1fs (limit 120s)",
              correct, instances.size(), 100 * rate, mean_f, max_d, t)};
}

Verdict unitarity() {
  std::mt19937_64 rng(303);
  for (int d = 1; d <= 10; ++d) {
    const auto q = testing::random_instance(rng, d);
    for (double tau : {0.0, 1.0, 10.0, 50.0, 100.0}) {
      for (auto method : {EvolutionMethod::Trotter2, EvolutionMethod::ExactStep}) {
        tracked_evolve(q, AnnealSchedule{tau, 0.01}, method);
      }
    }
  }
  for (int d : {12, 16, 20}) {
    const auto q = testing::random_instance(rng, d);
    tracked_evolve(q, AnnealSchedule{50.0, 0.01}, EvolutionMethod::Trotter2);
  }
  return {g_norm_error <= 1e-9, fmt("max |norm-1| = %.2e over %zu evolutions (limit 1e-9)", g_norm_error, g_evolutions)};
}

Verdict spectral_cross_check() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst = 0.0;
  int checks = 0;
  for (int i = 0; i < 50; ++i) {
    const auto q = testing::random_instance(rng, dim(rng));
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const auto dense = testing::dense_spectrum(q, s);
      const int k = std::min<int>(2, static_cast<int>(dense.size()));
      const auto iterative = low_spectrum(q, s, k);
      for (int j = 0; j < k; ++j) worst = std::max(worst, std::abs(iterative.values[j] - dense[j]));
      ++checks;
    }
  }
  return {worst <= 1e-8, fmt("max |E_iter - E_dense| = %.2e over %d (instance, s) pairs (limit 1e-8)", worst, checks)};
}

Verdict adiabatic_trend() {
  const auto instances = generator_instances(60, 12, {8, 12, 16}, nondegenerate, 505);
  std::map<double, std::vector<double>> by_tau;
  for (const auto& q : instances) {
    for (double tau : {10.0, 50.0, 100.0}) {
      by_tau[tau].push_back(fidelity(tracked_evolve(q, AnnealSchedule{tau, 0.01}, EvolutionMethod::Trotter2), q));
    }
  }
  const double m10 = quantile(by_tau[10.0], 0.5), m50 = quantile(by_tau[50.0], 0.5), m100 = quantile(by_tau[100.0], 0.5);
  return {m50 - m10 >= 0.2 && m100 >= m50 - 0.02,
          fmt("median fidelity tau=10: %.4f, tau=50: %.4f, tau=100: %.4f on %zu instances (need +0.2, then >= -0.02)",
              m10, m50, m100, instances.size())};
}

Verdict landau_zener() {
  std::vector<GapFidelityPoint> exact;
  for (int i = 1; i <= 40; ++i) {
    const double delta = 0.05 * i;
    exact.push_back({delta, -std::expm1(-2.0 * delta * delta)});
  }
  const auto recovered = fit_landau_zener(exact);
  const bool exact_ok = std::abs(recovered.lambda - 2.0) <= 1e-6;

  // Single-qubit sweeps at tau = 10 across a range of fields: the gap is set by
  // the field, the fidelity by how diabatic the sweep is.
  std::vector<GapFidelityPoint> sweeps;
  for (int i = 0; i <= 25; ++i) {
    const double h = 0.5 + 0.1 * i;
    const auto q = assemble_qubo(SimilarityMatrix(1), {h}, 1.0, {0});
    const AnnealSchedule schedule{10.0, 0.01};
    const auto trace = gap_trace(q, schedule);
    sweeps.push_back({trace.delta_min, fidelity(tracked_evolve(q, schedule, EvolutionMethod::Trotter2), q)});
  }
  const auto lz = fit_landau_zener(sweeps);
  const auto linear = fit_linear_gap(sweeps);
  return {exact_ok && lz.residual < linear.residual,
          fmt("exact data: lambda = %.9f (target 2, tol 1e-6); sweeps: LZ residual %.4g vs linear %.4g",
              recovered.lambda, lz.residual, linear.residual)};
}

Verdict gap_scaling() {
  std::map<int, std::vector<double>> exact;
  for (int d = 2; d <= 16; ++d) exact[d] = {0.8 / d, 0.8 / d, 0.8 / d};
  const double exact_exponent = fit_gap_scaling(exact).exponent;

  std::map<int, std::vector<double>> generated;
  std::size_t traced = 0;
  for (int nf : {8, 12, 16}) {
    SyntheticConfig cfg;
    cfg.num_classes = 2;
    cfg.images_per_class = 15;
    cfg.nf = nf;
    cfg.seed = 606 + nf;
    const auto archive = gen_synthetic(cfg);
    for (const auto& record : archive.records) {
      try {
        const auto q = build_qubo(record, archive.shape(), kDefaultBeta);
        if (q.d > 12) continue;
        generated[q.d].push_back(gap_trace(q, AnnealSchedule{50.0, 0.01}).delta_min);
        ++traced;
      } catch (const EmptySelection&) {
      }
    }
  }
  const auto fit = fit_gap_scaling(generated);
  return {std::abs(exact_exponent + 1.0) <= 1e-6 && fit.exponent < 0.0,
          fmt("exact c/d data: exponent %.9f (target -1, tol 1e-6); generated archives: exponent %.3f from %zu "
              "traces over %zu dimensions (need < 0)",
              exact_exponent, fit.exponent, traced, fit.per_d_means.size())};
}

Verdict sa_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto instances =
      generator_instances(100, 16, {16, 20, 24, 28}, [](const QuboInstance& q) { return q.d >= 2; }, 707);
  int matched = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    SaParams params;
    params.seed = i;
    const auto sa = simulated_anneal(instances[i], params);
    matched += std::abs(sa.energy - brute_force(instances[i]).selection.energy) <= 1e-10 ? 1 : 0;
  }
  const double t = seconds_since(t0);
  int max_d = 0;
  for (const auto& q : instances) max_d = std::max(max_d, q.d);
  return {instances.size() == 100 && matched >= 99 && t < 60.0,
          fmt("%d/%zu reach the brute-force optimum (need 99), d up to %d, %.1fs (limit 60s)", matched,
              instances.size(), max_d, t)};
}

Verdict bhattacharyya_properties() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> len(1, 64);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = len(rng);
    const auto p = testing::random_distribution(rng, n);
    const auto q = testing::random_distribution(rng, n);
    const double pq = bhattacharyya(p, q), qp = bhattacharyya(q, p);
    const bool symmetric = pq == qp;
    const bool in_range = pq >= 0.0 && pq <= 1.0 + 1e-12;
    const bool self_one = std::abs(bhattacharyya(p, p) - 1.0) <= 1e-12;
    const bool distinct_below_one = p == q || pq < 1.0 - 1e-12;
    violations += (symmetric && in_range && self_one && distinct_below_one) ? 0 : 1;
  }

  SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.images_per_class = 10;
  cfg.nf = 12;
  cfg.seed = 809;
  PipelineConfig pc;
  pc.seed = 810;
  pc.compute_spectrum = false;
  const auto run = run_pipeline(pc, gen_synthetic(cfg));
  double worst = 0.0;
  bool have_matrix = run.correlation.has_value();
  if (have_matrix) {
    for (int a = 0; a < cfg.num_classes; ++a)
      for (int b = 0; b < cfg.num_classes; ++b)
        if (a != b) worst = std::max(worst, (*run.correlation)(a, b));
  }
  return {violations == 0 && have_matrix && run.failed == 0 && worst < 0.2,
          fmt("%d/1000 pairs violate symmetry/range/identity; disjoint-signature run (%zu ok, %zu failed): max "
              "off-diagonal overlap %.4f (need < 0.2)",
              violations, run.ok, run.failed, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"qubo-limits", qubo_limits},
      {"oracle-equivalence", oracle_equivalence},
      {"adiabatic-trend", adiabatic_trend},
      {"spectral-cross-check", spectral_cross_check},
      {"landau-zener", landau_zener},
      {"gap-scaling", gap_scaling},
      {"sa-correctness", sa_correctness},
      {"bhattacharyya", bhattacharyya_properties},
      // Last, so that it covers every evolution above as well as its own matrix.
      {"unitarity", unitarity},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
