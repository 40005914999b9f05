#include "qfs/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "qfs/errors.hpp"
#include "qfs/text_io.hpp"

namespace qfs {

std::vector<ClassDistribution> class_distributions(std::span<const SelectionResult> selections, int num_classes,
                                                   int nf) {
  if (num_classes < 1 || nf < 1) throw std::invalid_argument("class_distributions: need K >= 1 and nf >= 1");
  std::vector<ClassDistribution> out(num_classes);
  std::vector<std::vector<std::int64_t>> counts(num_classes, std::vector<std::int64_t>(nf, 0));
  for (int c = 0; c < num_classes; ++c) out[c].class_label = c;
  for (const auto& s : selections) {
    if (s.class_label < 0 || s.class_label >= num_classes) {
      throw std::invalid_argument("selection '" + s.image_id + "' has class outside [0, K)");
    }
    auto& dist = out[s.class_label];
    ++dist.image_count;
    // Each map counts once per image.
    std::set<int> unique(s.selected_fm_indices.begin(), s.selected_fm_indices.end());
    for (int a : unique) {
      if (a < 0 || a >= nf) throw std::invalid_argument("selection '" + s.image_id + "' has index outside [0, nf)");
      ++counts[s.class_label][a];
      ++dist.support_count;
    }
  }
  for (int c = 0; c < num_classes; ++c) {
    out[c].p.assign(nf, 0.0);
    if (out[c].support_count == 0) continue;
    for (int a = 0; a < nf; ++a) out[c].p[a] = static_cast<double>(counts[c][a]) / out[c].support_count;
  }
  return out;
}

double bhattacharyya(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("bhattacharyya: length mismatch");
  double s = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) s += std::sqrt(std::max(0.0, p[a]) * std::max(0.0, q[a]));
  return std::clamp(s, 0.0, 1.0);
}

CorrelationMatrix correlation_matrix(std::span<const ClassDistribution> distributions, double display_threshold) {
  CorrelationMatrix m;
  m.num_classes = static_cast<int>(distributions.size());
  m.display_threshold = display_threshold;
  m.bc.assign(distributions.size() * distributions.size(), 0.0);
  for (const auto& dist : distributions) m.empty_class.push_back(dist.empty());
  for (int a = 0; a < m.num_classes; ++a) {
    for (int b = a; b < m.num_classes; ++b) {
      if (distributions[a].empty() || distributions[b].empty()) continue;
      const double v = bhattacharyya(distributions[a].p, distributions[b].p);
      m.bc[a * m.num_classes + b] = v;
      m.bc[b * m.num_classes + a] = v;
    }
  }
  return m;
}

std::vector<double> off_diagonal_couplings(const QuboInstance& instance) { return instance.J.upper_triangle(); }

CouplingDistributionFit fit_j_distribution(std::span<const double> couplings) {
  if (couplings.size() < 30) throw std::invalid_argument("J distribution fit needs at least 30 samples");
  CouplingDistributionFit fit;
  fit.n = couplings.size();
  const double n = static_cast<double>(fit.n);
  std::vector<double> sorted(couplings.begin(), couplings.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  if (lo == hi) {
    // Summation rounding would otherwise leave a spurious spread.
    fit.mu = lo;
    fit.sigma = 0.0;
  } else {
    fit.mu = std::accumulate(couplings.begin(), couplings.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : couplings) ss += (v - fit.mu) * (v - fit.mu);
    fit.sigma = std::sqrt(ss / (n - 1.0));
  }
  auto q = [&](double f) {
    const double pos = f * (n - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    const auto j = std::min(i + 1, sorted.size() - 1);
    return sorted[i] + (pos - i) * (sorted[j] - sorted[i]);
  };
  const double width = 2.0 * (q(0.75) - q(0.25)) / std::cbrt(n);
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) bins = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / width)), 1, 10000);
  const double step = hi > lo ? (hi - lo) / bins : 1.0;
  for (std::size_t b = 0; b < bins; ++b) fit.histogram.push_back({lo + b * step, lo + (b + 1) * step, 0});
  for (double v : sorted) {
    auto b = hi > lo ? static_cast<std::size_t>((v - lo) / step) : 0;
    ++fit.histogram[std::min(b, bins - 1)].count;
  }
  return fit;
}

std::vector<double> bilinear_resize(std::span<const double> src, int h, int w, int out_h, int out_w) {
  if (h < 1 || w < 1 || out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: empty image");
  std::vector<double> out(static_cast<std::size_t>(out_h) * out_w);
  const double sy = static_cast<double>(h) / out_h, sx = static_cast<double>(w) / out_w;
  for (int i = 0; i < out_h; ++i) {
    const double y = std::clamp((i + 0.5) * sy - 0.5, 0.0, h - 1.0);
    const int y0 = static_cast<int>(y), y1 = std::min(y0 + 1, h - 1);
    const double fy = y - y0;
    for (int j = 0; j < out_w; ++j) {
      const double x = std::clamp((j + 0.5) * sx - 0.5, 0.0, w - 1.0);
      const int x0 = static_cast<int>(x), x1 = std::min(x0 + 1, w - 1);
      const double fx = x - x0;
      const double top = src[y0 * w + x0] * (1 - fx) + src[y0 * w + x1] * fx;
      const double bottom = src[y1 * w + x0] * (1 - fx) + src[y1 * w + x1] * fx;
      out[static_cast<std::size_t>(i) * out_w + j] = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

ExplanationMap heatmap(const FeatureRecord& record, const FeatureShape& shape, std::span<const double> alpha,
                       const SelectionResult& selection, std::optional<std::pair<int, int>> upsample_to) {
  if (static_cast<int>(alpha.size()) != shape.nf) throw std::invalid_argument("heatmap: alpha length != nf");
  ExplanationMap map;
  map.image_id = record.image_id;
  map.height = shape.hf;
  map.width = shape.wf;
  map.heat.assign(shape.plane(), 0.0);
  for (int a : selection.selected_fm_indices) {
    if (a < 0 || a >= shape.nf) throw std::invalid_argument("heatmap: selected index outside [0, nf)");
    const auto f = record.activation_map(a, shape);
    for (std::size_t k = 0; k < f.size(); ++k) map.heat[k] += alpha[a] * f[k];
  }
  double top = 0.0;
  for (auto& v : map.heat) {
    v = std::max(0.0, v);
    top = std::max(top, v);
  }
  map.all_zero = !(top > 0.0);
  if (!map.all_zero) {
    for (auto& v : map.heat) v /= top;
  }
  if (upsample_to) {
    map.up_height = upsample_to->first;
    map.up_width = upsample_to->second;
    map.upsampled = bilinear_resize(map.heat, map.height, map.width, map.up_height, map.up_width);
    for (auto& v : map.upsampled) v = std::clamp(v, 0.0, 1.0);
  }
  return map;
}

void write_pgm(std::span<const double> values, int height, int width, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (double v : values) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)))));
  }
}

void write_matrix_csv(std::span<const double> values, int height, int width, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (int j = 0; j < width; ++j) out << (j ? ",c" : "c") << j;
  out << '\n';
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      if (j) out << ',';
      out << format_double(values[static_cast<std::size_t>(i) * width + j]);
    }
    out << '\n';
  }
}

}  // namespace qfs
