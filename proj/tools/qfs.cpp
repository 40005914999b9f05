// qfs: feature-map selection by QUBO, command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfs/analytics.hpp"
#include "qfs/annealer.hpp"
#include "qfs/archive.hpp"
#include "qfs/errors.hpp"
#include "qfs/pipeline.hpp"
#include "qfs/qubo.hpp"
#include "qfs/selection.hpp"
#include "qfs/solvers.hpp"
#include "qfs/spectrum.hpp"
#include "qfs/text_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

std::optional<std::int64_t> parse_shots(const std::string& text) {
  if (text == "auto") return std::nullopt;
  std::size_t used = 0;
  const long long n = std::stoll(text, &used);
  if (used != text.size() || n < 1) throw std::invalid_argument("--shots must be 'auto' or a positive integer");
  return n;
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw std::invalid_argument("--upsample expects HxW, e.g. 224x224");
  const int h = std::stoi(text.substr(0, x));
  const int w = std::stoi(text.substr(x + 1));
  if (h < 1 || w < 1) throw std::invalid_argument("--upsample dimensions must be positive");
  return {h, w};
}

qfs::Readout parse_readout(const std::string& text) {
  if (text == "mode") return qfs::Readout::HistogramMode;
  if (text == "argmax") return qfs::Readout::ArgmaxProbability;
  throw std::invalid_argument("--readout must be 'mode' or 'argmax'");
}

void require_out(const Globals& g) {
  if (g.out.empty()) throw std::invalid_argument("--out is required");
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw qfs::Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string sibling_name(const fs::path& path, const std::string& suffix) {
  return (path.parent_path() / (path.stem().string() + suffix + path.extension().string())).string();
}

// Runs one solver per instance, fail-soft: failures are reported on stderr
// and reflected in the exit status.
int solve_batch(const std::vector<qfs::QuboInstance>& instances, int threads,
                const std::function<qfs::SelectionResult(const qfs::QuboInstance&, std::size_t)>& solve,
                const fs::path& out) {
  std::vector<std::optional<qfs::SelectionResult>> results(instances.size());
  std::vector<std::string> errors(instances.size());
  qfs::parallel_for(instances.size(), threads, [&](std::size_t i) {
    try {
      results[i] = solve(instances[i], i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<qfs::SelectionResult> ok;
  int failed = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (results[i]) {
      ok.push_back(std::move(*results[i]));
    } else {
      ++failed;
      std::cerr << "qfs: " << instances[i].image_id << ": " << errors[i] << '\n';
    }
  }
  qfs::write_selection_file(ok, out);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qfs;
  CLI::App app{"Feature-map selection by quadratic binary optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", g.out, "Output file or directory");

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  // gen-synthetic
  SyntheticConfig synth;
  auto* gen = sub("gen-synthetic", "Write a synthetic feature archive with known signature maps");
  gen->add_option("--num-classes", synth.num_classes)->capture_default_str();
  gen->add_option("--images-per-class", synth.images_per_class)->capture_default_str();
  gen->add_option("--nf", synth.nf)->capture_default_str();
  gen->add_option("--hf", synth.hf)->capture_default_str();
  gen->add_option("--wf", synth.wf)->capture_default_str();
  gen->add_option("--sparsity", synth.sparsity)->capture_default_str();

  // build
  std::string archive_dir;
  double beta = kDefaultBeta;
  auto* build = sub("build", "Build one QUBO per archive record (JSON lines)");
  build->add_option("--archive", archive_dir)->required();
  build->add_option("--beta", beta)->capture_default_str();

  // anneal
  std::string qubo_file;
  double tau = 50.0;
  double ds = 0.01;
  std::string shots_text = "auto";
  std::string evolution_text = "trotter2";
  std::string readout_text = "mode";
  auto* anneal = sub("anneal", "Simulated quantum annealing of every QUBO in a file");
  anneal->add_option("--qubo", qubo_file)->required();
  anneal->add_option("--tau", tau)->capture_default_str();
  anneal->add_option("--ds", ds)->capture_default_str();
  anneal->add_option("--shots", shots_text, "'auto' (d^2) or a count")->capture_default_str();
  anneal->add_option("--method", evolution_text, "trotter2 | exact_step")->capture_default_str();
  anneal->add_option("--readout", readout_text, "mode | argmax")->capture_default_str();

  // solve
  std::string solve_method = "exact";
  SaParams sa;
  auto* solve = sub("solve", "Classical reference solvers");
  solve->add_option("--qubo", qubo_file)->required();
  solve->add_option("--method", solve_method, "exact | sa")->capture_default_str();
  solve->add_option("--reads", sa.num_reads)->capture_default_str();
  solve->add_option("--sweeps", sa.num_sweeps)->capture_default_str();

  // spectrum
  std::string image_id;
  std::string summary_dir;
  auto* spectrum = sub("spectrum", "Two lowest levels along the annealing path (CSV: s,E0,E1)");
  spectrum->add_option("--qubo", qubo_file)->required();
  spectrum->add_option("--tau", tau)->capture_default_str();
  spectrum->add_option("--ds", ds)->capture_default_str();
  spectrum->add_option("--image", image_id, "Record to trace (default: first)");
  spectrum->add_option("--summary", summary_dir, "Directory for per-record gap CSV, cumulative CSV and SVG");

  // fit
  std::string fit_kind;
  std::string in_file;
  auto* fit = sub("fit", "Fit Landau-Zener or gap-scaling models to a CSV table");
  fit->add_option("--kind", fit_kind, "lz (columns delta,fidelity) | gap-scaling (columns d,delta_min)")
      ->required()
      ->check(CLI::IsMember({"lz", "gap-scaling"}));
  fit->add_option("--in", in_file)->required();

  // correlate
  std::string selections_file;
  double threshold = 0.10;
  auto* correlate = sub("correlate", "Class-class Bhattacharyya overlap of selection distributions");
  correlate->add_option("--selections", selections_file)->required();
  correlate->add_option("--archive", archive_dir)->required();
  correlate->add_option("--threshold", threshold, "Display threshold")->capture_default_str();

  // heatmap
  std::string upsample_text;
  auto* heat = sub("heatmap", "Explanation map of one image (.pgm or .csv by extension)");
  heat->add_option("--archive", archive_dir)->required();
  heat->add_option("--selections", selections_file)->required();
  heat->add_option("--image", image_id)->required();
  heat->add_option("--upsample", upsample_text, "HxW");

  // run
  PipelineConfig pc;
  std::vector<double> taus;
  std::string run_method = "qa";
  bool no_spectrum = false;
  auto* run = sub("run", "Full pipeline: archive -> QUBO -> solver -> reports");
  run->add_option("--archive", archive_dir)->required();
  run->add_option("--beta", beta)->capture_default_str();
  run->add_option("--tau", taus, "One or more annealing times; the first drives the selection")->delimiter(',');
  run->add_option("--ds", ds)->capture_default_str();
  run->add_option("--shots", shots_text)->capture_default_str();
  run->add_option("--method", run_method, "qa | sa | exact")->capture_default_str();
  run->add_option("--evolution", evolution_text, "trotter2 | exact_step")->capture_default_str();
  run->add_option("--readout", readout_text, "mode | argmax")->capture_default_str();
  run->add_option("--reads", sa.num_reads)->capture_default_str();
  run->add_option("--sweeps", sa.num_sweeps)->capture_default_str();
  run->add_flag("--no-spectrum", no_spectrum);
  run->add_option("--spectrum-max-d", pc.spectrum_max_d)->capture_default_str();
  run->add_option("--threshold", threshold, "Correlation display threshold")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      require_out(g);
      synth.seed = g.seed;
      write_archive(gen_synthetic(synth), g.out);
      return 0;
    }
    if (*build) {
      require_out(g);
      const FeatureArchive archive = read_archive(archive_dir);
      std::vector<QuboInstance> instances;
      int skipped = 0;
      for (const auto& record : archive.records) {
        try {
          instances.push_back(build_qubo(record, archive.shape(), beta));
        } catch (const EmptySelection& e) {
          ++skipped;
          std::cerr << "qfs: skipped: " << e.what() << '\n';
        }
      }
      write_qubo_file(instances, g.out);
      std::cerr << "qfs: " << instances.size() << " instances, " << skipped << " skipped\n";
      return 0;
    }
    if (*anneal) {
      require_out(g);
      QaOptions qa;
      qa.schedule = AnnealSchedule{tau, ds};
      qa.schedule.validate();
      qa.method = evolution_method_from_string(evolution_text);
      qa.shots = parse_shots(shots_text);
      qa.readout = parse_readout(readout_text);
      return solve_batch(read_qubo_file(qubo_file), g.threads,
                         [&](const QuboInstance& q, std::size_t i) {
                           QaOptions o = qa;
                           o.seed = derive_seed(g.seed, i);
                           return quantum_anneal(q, o);
                         },
                         g.out);
    }
    if (*solve) {
      require_out(g);
      const SolveMethod method = solve_method_from_string(solve_method);
      if (method == SolveMethod::Qa) throw std::invalid_argument("use 'qfs anneal' for quantum annealing");
      if (method == SolveMethod::Sa) sa.validate();
      return solve_batch(read_qubo_file(qubo_file), g.threads,
                         [&](const QuboInstance& q, std::size_t i) {
                           if (method == SolveMethod::Exact) return brute_force(q).selection;
                           SaParams p = sa;
                           p.seed = derive_seed(g.seed, i);
                           return simulated_anneal(q, p);
                         },
                         g.out);
    }
    if (*spectrum) {
      const auto instances = read_qubo_file(qubo_file);
      const AnnealSchedule schedule{tau, ds};
      schedule.validate();
      if (!g.out.empty()) {
        if (instances.empty()) throw std::invalid_argument("QUBO file holds no instances");
        auto it = instances.begin();
        if (!image_id.empty()) {
          it = std::find_if(instances.begin(), instances.end(),
                            [&](const QuboInstance& q) { return q.image_id == image_id; });
          if (it == instances.end()) throw std::invalid_argument("no instance for image '" + image_id + "'");
        }
        const SpectrumTrace trace = gap_trace(*it, schedule);
        CsvTable table{{"s", "E0", "E1"}, {}};
        for (std::size_t k = 0; k < trace.s_grid.size(); ++k)
          table.rows.push_back({format_double(trace.s_grid[k]), format_double(trace.e0[k]), format_double(trace.e1[k])});
        write_csv(table, g.out);
      }
      if (!summary_dir.empty()) {
        std::vector<ImageOutcome> outcomes(instances.size());
        parallel_for(instances.size(), g.threads, [&](std::size_t i) {
          auto& o = outcomes[i];
          o.record_index = i;
          o.image_id = instances[i].image_id;
          o.class_label = instances[i].class_label;
          o.d = instances[i].d;
          try {
            const SpectrumTrace trace = gap_trace(instances[i], schedule);
            o.delta_min = trace.delta_min;
            o.s_min = trace.s_min;
            o.ground_degeneracy = trace.ground_degeneracy_at_end;
          } catch (const std::exception& e) {
            o.status = ImageStatus::Failed;
            o.message = e.what();
          }
        });
        int failed = 0;
        for (const auto& o : outcomes) {
          if (o.status == ImageStatus::Failed) {
            ++failed;
            std::cerr << "qfs: " << o.image_id << ": " << o.message << '\n';
          }
        }
        fs::create_directories(summary_dir);
        write_gap_reports(outcomes, summary_dir);
        if (failed) return 1;
      }
      if (g.out.empty() && summary_dir.empty()) throw std::invalid_argument("--out or --summary is required");
      return 0;
    }
    if (*fit) {
      require_out(g);
      const CsvTable table = read_csv(in_file);
      json doc;
      if (fit_kind == "lz") {
        const auto dcol = table.column("delta");
        const auto fcol = table.column("fidelity");
        std::vector<GapFidelityPoint> points;
        for (const auto& row : table.rows) points.push_back({std::stod(row[dcol]), std::stod(row[fcol])});
        const LandauZenerFit lz = fit_landau_zener(points);
        const LinearGapFit lin = fit_linear_gap(points);
        doc = {{"kind", "lz"},
               {"lambda", lz.lambda},
               {"residual", lz.residual},
               {"points_used", lz.points_used},
               {"linear", {{"slope", lin.slope}, {"intercept", lin.intercept}, {"residual", lin.residual}}}};
      } else {
        const auto dcol = table.column("d");
        const auto gcol = table.column("delta_min");
        std::map<int, std::vector<double>> samples;
        for (const auto& row : table.rows) samples[std::stoi(row[dcol])].push_back(std::stod(row[gcol]));
        const GapScalingFit gs = fit_gap_scaling(samples);
        json per_d = json::array();
        for (const auto& [d, mean] : gs.per_d_means) {
          per_d.push_back({{"d", d},
                           {"mean", mean},
                           {"q1", gs.per_d_quartiles.at(d).first},
                           {"q3", gs.per_d_quartiles.at(d).second},
                           {"hardest", gs.hardest_instances.at(d)}});
        }
        doc = {{"kind", "gap-scaling"},
               {"exponent", gs.exponent},
               {"intercept", gs.intercept},
               {"per_d", per_d},
               {"excluded_d", gs.excluded_d}};
      }
      write_json(doc, g.out);
      return 0;
    }
    if (*correlate) {
      require_out(g);
      const FeatureArchive archive = read_archive(archive_dir);
      const auto selections = read_selection_file(selections_file);
      const auto dists = class_distributions(selections, archive.header.num_classes, archive.shape().nf);
      const CorrelationMatrix corr = correlation_matrix(dists, threshold);
      const int k = corr.num_classes;
      std::vector<double> shown(corr.bc.size());
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) shown[static_cast<std::size_t>(a) * k + b] = corr.display(a, b);
      write_matrix_csv(corr.bc, k, k, g.out);
      write_matrix_csv(shown, k, k, sibling_name(g.out, "_display"));
      return 0;
    }
    if (*heat) {
      require_out(g);
      const FeatureArchive archive = read_archive(archive_dir);
      const auto rec = std::find_if(archive.records.begin(), archive.records.end(),
                                    [&](const FeatureRecord& r) { return r.image_id == image_id; });
      if (rec == archive.records.end()) throw std::invalid_argument("no record '" + image_id + "' in archive");
      const auto selections = read_selection_file(selections_file);
      const auto sel = std::find_if(selections.begin(), selections.end(),
                                    [&](const SelectionResult& s) { return s.image_id == image_id; });
      if (sel == selections.end()) throw std::invalid_argument("no selection for image '" + image_id + "'");
      std::optional<std::pair<int, int>> size;
      if (!upsample_text.empty()) size = parse_size(upsample_text);
      const auto alpha = importance(*rec, archive.shape());
      const ExplanationMap map = heatmap(*rec, archive.shape(), alpha, *sel, size);
      const auto& values = size ? map.upsampled : map.heat;
      const int h = size ? map.up_height : map.height;
      const int w = size ? map.up_width : map.width;
      const fs::path out = g.out;
      if (out.extension() == ".pgm") {
        write_pgm(values, h, w, out);
      } else if (out.extension() == ".csv") {
        write_matrix_csv(values, h, w, out);
      } else {
        throw std::invalid_argument("--out must end in .pgm or .csv");
      }
      if (map.all_zero) std::cerr << "qfs: empty explanation map for '" << image_id << "'\n";
      return 0;
    }
    if (*run) {
      require_out(g);
      pc.archive_path = archive_dir;
      pc.beta = beta;
      if (!taus.empty()) pc.taus = taus;
      pc.ds = ds;
      pc.shots = parse_shots(shots_text);
      pc.method = solve_method_from_string(run_method);
      pc.evolution = evolution_method_from_string(evolution_text);
      pc.readout = parse_readout(readout_text);
      pc.sa = sa;
      pc.seed = g.seed;
      pc.output_dir = g.out;
      pc.threads = g.threads;
      pc.compute_spectrum = !no_spectrum;
      pc.display_threshold = threshold;
      const RunManifest manifest = run_pipeline(pc);
      std::cerr << "qfs: " << manifest.images.size() << " records: " << manifest.ok << " ok, " << manifest.skipped
                << " skipped, " << manifest.failed << " failed\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "qfs: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
