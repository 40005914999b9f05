#include "qfs/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "qfs/errors.hpp"
#include "qfs/spectrum.hpp"
#include "qfs/text_io.hpp"

namespace qfs {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string status_name(ImageStatus status) {
  switch (status) {
    case ImageStatus::Ok: return "ok";
    case ImageStatus::Skipped: return "skipped";
    case ImageStatus::Failed: return "failed";
  }
  return "failed";
}

std::string evolution_name(EvolutionMethod method) {
  return method == EvolutionMethod::Trotter2 ? "trotter2" : "exact_step";
}

SelectionResult solve_one(const QuboInstance& instance, const PipelineConfig& config, std::uint64_t seed,
                          ImageOutcome& outcome) {
  SolveMethod method = config.method;
  std::string note;
  if (method == SolveMethod::Qa && instance.d > kMaxEvolutionQubits) {
    method = SolveMethod::Sa;
    note = "qa->sa: d=" + std::to_string(instance.d) + " exceeds state-vector limit " +
           std::to_string(kMaxEvolutionQubits);
  } else if (method == SolveMethod::Exact && instance.d > kMaxBruteForceVariables) {
    method = SolveMethod::Sa;
    note = "exact->sa: d=" + std::to_string(instance.d) + " exceeds enumeration limit " +
           std::to_string(kMaxBruteForceVariables);
  }

  SelectionResult result;
  switch (method) {
    case SolveMethod::Qa: {
      QaOptions qa;
      qa.schedule.tau = config.taus.front();
      qa.schedule.ds = config.ds;
      qa.method = config.evolution;
      qa.shots = config.shots;
      qa.readout = config.readout;
      qa.seed = seed;
      result = quantum_anneal(instance, qa);
      outcome.fidelity_by_tau.assign(config.taus.size(), std::nullopt);
      outcome.fidelity_by_tau[0] = result.fidelity;
      for (std::size_t t = 1; t < config.taus.size(); ++t) {
        AnnealSchedule schedule{config.taus[t], config.ds};
        outcome.fidelity_by_tau[t] = fidelity(evolve(instance, schedule, config.evolution), instance);
      }
      break;
    }
    case SolveMethod::Sa: {
      SaParams sa = config.sa;
      sa.seed = seed;
      result = simulated_anneal(instance, sa);
      break;
    }
    case SolveMethod::Exact:
      result = brute_force(instance).selection;
      break;
  }
  result.note = note;
  return result;
}

void process_record(const FeatureRecord& record, const FeatureShape& shape, const PipelineConfig& config,
                    std::size_t index, ImageOutcome& outcome, std::optional<QuboInstance>& instance_out) {
  outcome.record_index = index;
  outcome.image_id = record.image_id;
  outcome.class_label = record.class_label;
  try {
    QuboInstance instance = build_qubo(record, shape, config.beta);
    outcome.d = instance.d;
    outcome.selection = solve_one(instance, config, derive_seed(config.seed, index), outcome);
    if (config.compute_spectrum && instance.d <= config.spectrum_max_d) {
      try {
        const SpectrumTrace trace = gap_trace(instance, AnnealSchedule{config.taus.front(), config.ds});
        outcome.delta_min = trace.delta_min;
        outcome.s_min = trace.s_min;
        outcome.ground_degeneracy = trace.ground_degeneracy_at_end;
      } catch (const ConvergenceError& e) {
        outcome.message = std::string("spectrum: ") + e.what();
      }
    }
    instance_out = std::move(instance);
  } catch (const EmptySelection& e) {
    outcome.status = ImageStatus::Skipped;
    outcome.message = e.what();
  } catch (const std::exception& e) {
    outcome.status = ImageStatus::Failed;
    outcome.message = e.what();
  }
}

struct Summary {
  std::size_t count = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  return s;
}

void write_fidelity_tables(const RunManifest& run, const std::filesystem::path& dir) {
  const auto& taus = run.config.taus;
  CsvTable by_class{{"group", "tau", "count", "median", "q1", "q3"}, {}};
  CsvTable by_d{{"d", "tau", "count", "median", "q1", "q3"}, {}};
  std::vector<int> classes;
  std::vector<int> dims;
  for (const auto& image : run.images) {
    if (image.fidelity_by_tau.empty()) continue;
    classes.push_back(image.class_label);
    dims.push_back(image.d);
  }
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());

  auto collect = [&](std::size_t t, auto&& keep) {
    std::vector<double> values;
    for (const auto& image : run.images) {
      if (t < image.fidelity_by_tau.size() && image.fidelity_by_tau[t] && keep(image))
        values.push_back(*image.fidelity_by_tau[t]);
    }
    return summarize(values);
  };
  auto row = [](std::string key, double tau, const Summary& s) {
    return std::vector<std::string>{std::move(key), format_double(tau), std::to_string(s.count),
                                    format_double(s.median), format_double(s.q1), format_double(s.q3)};
  };
  for (std::size_t t = 0; t < taus.size(); ++t) {
    by_class.rows.push_back(row("all", taus[t], collect(t, [](const ImageOutcome&) { return true; })));
    for (int c : classes)
      by_class.rows.push_back(row("class=" + std::to_string(c), taus[t],
                                  collect(t, [c](const ImageOutcome& i) { return i.class_label == c; })));
    for (int d : dims)
      by_d.rows.push_back(row(std::to_string(d), taus[t], collect(t, [d](const ImageOutcome& i) { return i.d == d; })));
  }
  write_csv(by_class, dir / "fidelity_tau.csv");
  write_csv(by_d, dir / "fidelity_d_tau.csv");
}

void write_correlation(const CorrelationMatrix& corr, const std::filesystem::path& dir);

}  // namespace

void write_gap_reports(std::span<const ImageOutcome> images, const std::filesystem::path& dir) {
  CsvTable gaps{{"image_id", "class", "d", "delta_min", "s_min", "ground_degeneracy"}, {}};
  std::vector<double> deltas;
  for (const auto& image : images) {
    if (!image.delta_min) continue;
    gaps.rows.push_back({image.image_id, std::to_string(image.class_label), std::to_string(image.d),
                         format_double(*image.delta_min), format_double(*image.s_min),
                         std::to_string(*image.ground_degeneracy)});
    deltas.push_back(*image.delta_min);
  }
  write_csv(gaps, dir / "gaps.csv");

  std::sort(deltas.begin(), deltas.end());
  CsvTable cumulative{{"delta_min", "cumulative_fraction"}, {}};
  for (std::size_t i = 0; i < deltas.size(); ++i)
    cumulative.rows.push_back(
        {format_double(deltas[i]), format_double(static_cast<double>(i + 1) / static_cast<double>(deltas.size()))});
  write_csv(cumulative, dir / "gap_cumulative.csv");

  // Histogram of log10(delta_min); exact degeneracies are floored at 1e-12.
  std::vector<std::pair<double, double>> bars;
  double width = 1.0;
  if (!deltas.empty()) {
    std::vector<double> logs;
    for (double d : deltas) logs.push_back(std::log10(std::max(d, 1e-12)));
    const double lo = logs.front();
    const double hi = logs.back();
    const int bins = hi > lo ? std::clamp(static_cast<int>(std::ceil(std::sqrt(logs.size()))), 1, 30) : 1;
    width = hi > lo ? (hi - lo) / bins : 1.0;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : logs) {
      const int b = hi > lo ? std::min(bins - 1, static_cast<int>((v - lo) / width)) : 0;
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
    for (int b = 0; b < bins; ++b) bars.emplace_back(lo + (b + 0.5) * width, counts[static_cast<std::size_t>(b)]);
  }
  write_bar_svg(bars, width, "log10 minimum gap", dir / "gap_histogram.svg");
}

namespace {

void write_correlation(const CorrelationMatrix& corr, const std::filesystem::path& dir) {
  CsvTable raw{{"class"}, {}};
  for (int b = 0; b < corr.num_classes; ++b) raw.header.push_back(std::to_string(b));
  CsvTable shown = raw;
  for (int a = 0; a < corr.num_classes; ++a) {
    std::vector<std::string> r{std::to_string(a)};
    std::vector<std::string> s{std::to_string(a)};
    for (int b = 0; b < corr.num_classes; ++b) {
      r.push_back(format_double(corr(a, b)));
      s.push_back(format_double(corr.display(a, b)));
    }
    raw.rows.push_back(std::move(r));
    shown.rows.push_back(std::move(s));
  }
  write_csv(raw, dir / "correlation.csv");
  write_csv(shown, dir / "correlation_display.csv");
}

void write_coupling_histogram(const CouplingDistributionFit& fit, const std::filesystem::path& dir) {
  CsvTable table{{"lo", "hi", "count", "gaussian_expected"}, {}};
  for (const auto& bin : fit.histogram) {
    double expected = 0.0;
    if (fit.sigma > 0.0) {
      const auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - fit.mu) / (fit.sigma * std::sqrt(2.0))); };
      expected = static_cast<double>(fit.n) * (cdf(bin.hi) - cdf(bin.lo));
    }
    table.rows.push_back({format_double(bin.lo), format_double(bin.hi), std::to_string(bin.count),
                          format_double(expected)});
  }
  write_csv(table, dir / "j_histogram.csv");
}

nlohmann::json manifest_json(const RunManifest& run) {
  using nlohmann::json;
  const auto& c = run.config;
  json config = {{"archive", c.archive_path.string()},
                 {"beta", c.beta},
                 {"taus", c.taus},
                 {"ds", c.ds},
                 {"method", to_string(c.method)},
                 {"evolution", evolution_name(c.evolution)},
                 {"readout", c.readout == Readout::HistogramMode ? "mode" : "argmax"},
                 {"sa_reads", c.sa.num_reads},
                 {"sa_sweeps", c.sa.num_sweeps},
                 {"seed", c.seed},
                 {"spectrum", c.compute_spectrum},
                 {"spectrum_max_d", c.spectrum_max_d},
                 {"display_threshold", c.display_threshold}};
  config["shots"] = c.shots ? json(*c.shots) : json("auto");

  json images = json::array();
  for (const auto& image : run.images) {
    json entry = {{"index", image.record_index},
                  {"image_id", image.image_id},
                  {"class", image.class_label},
                  {"status", status_name(image.status)},
                  {"d", image.d}};
    if (!image.message.empty()) entry["message"] = image.message;
    if (image.selection) {
      entry["method"] = to_string(image.selection->method);
      entry["energy"] = image.selection->energy;
      if (!image.selection->note.empty()) entry["note"] = image.selection->note;
    }
    if (image.delta_min) {
      entry["delta_min"] = *image.delta_min;
      entry["s_min"] = *image.s_min;
      entry["ground_degeneracy"] = *image.ground_degeneracy;
    }
    if (!image.fidelity_by_tau.empty()) {
      json f = json::array();
      for (const auto& v : image.fidelity_by_tau) f.push_back(v ? json(*v) : json(nullptr));
      entry["fidelity_by_tau"] = f;
    }
    images.push_back(std::move(entry));
  }

  json out = {{"tool", "qfs"},
              {"version", kVersion},
              {"config", config},
              {"counts", {{"records", run.images.size()}, {"ok", run.ok}, {"skipped", run.skipped}, {"failed", run.failed}}},
              {"images", images}};
  if (run.couplings) {
    out["couplings"] = {{"mu", run.couplings->mu}, {"sigma", run.couplings->sigma}, {"n", run.couplings->n}};
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (taus.empty()) throw std::invalid_argument("at least one annealing time is required");
  for (double tau : taus) AnnealSchedule{tau, ds}.validate();
  if (shots && *shots < 1) throw std::invalid_argument("shots must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (method == SolveMethod::Sa) sa.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

RunManifest run_pipeline(const PipelineConfig& config) {
  return run_pipeline(config, read_archive(config.archive_path));
}

RunManifest run_pipeline(const PipelineConfig& config, const FeatureArchive& archive) {
  config.validate();
  RunManifest run;
  run.config = config;
  const std::size_t n = archive.records.size();
  run.images.resize(n);
  std::vector<std::optional<QuboInstance>> instances(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    process_record(archive.records[i], archive.shape(), config, i, run.images[i], instances[i]);
  });

  std::vector<SelectionResult> selections;
  std::vector<double> couplings;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& image = run.images[i];
    switch (image.status) {
      case ImageStatus::Ok: ++run.ok; break;
      case ImageStatus::Skipped: ++run.skipped; break;
      case ImageStatus::Failed: ++run.failed; break;
    }
    if (image.selection) selections.push_back(*image.selection);
    if (instances[i]) {
      const auto upper = off_diagonal_couplings(*instances[i]);
      couplings.insert(couplings.end(), upper.begin(), upper.end());
      run.instances.push_back(std::move(*instances[i]));
    }
  }

  const auto distributions = class_distributions(selections, archive.header.num_classes, archive.shape().nf);
  run.correlation = correlation_matrix(distributions, config.display_threshold);
  if (couplings.size() >= 30) run.couplings = fit_j_distribution(couplings);

  if (!config.output_dir.empty()) write_run_outputs(run, config.output_dir);
  return run;
}

void write_run_outputs(const RunManifest& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_qubo_file(run.instances, dir / "qubo.jsonl");
  std::vector<SelectionResult> selections;
  for (const auto& image : run.images)
    if (image.selection) selections.push_back(*image.selection);
  write_selection_file(selections, dir / "selections.jsonl");
  if (run.correlation) write_correlation(*run.correlation, dir);
  if (run.config.compute_spectrum) write_gap_reports(run.images, dir);
  if (run.config.taus.size() > 1 && run.config.method == SolveMethod::Qa) write_fidelity_tables(run, dir);
  if (run.couplings) write_coupling_histogram(*run.couplings, dir);

  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << manifest_json(run).dump(2) << '\n';
}

}  // namespace qfs
