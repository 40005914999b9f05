#include "qfs/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qfs/errors.hpp"

namespace qfs {
using nlohmann::json;

std::vector<double> SimilarityMatrix::upper_triangle() const {
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(d_) * (d_ > 0 ? d_ - 1 : 0) / 2);
  for (int p = 0; p < d_; ++p) {
    for (int q = p + 1; q < d_; ++q) upper.push_back((*this)(p, q));
  }
  return upper;
}

SimilarityMatrix SimilarityMatrix::from_upper_triangle(int d, std::span<const double> upper) {
  if (upper.size() != static_cast<std::size_t>(d) * (d > 0 ? d - 1 : 0) / 2) {
    throw std::invalid_argument("J_upper has wrong length for d = " + std::to_string(d));
  }
  SimilarityMatrix J(d);
  std::size_t k = 0;
  for (int p = 0; p < d; ++p) {
    for (int q = p + 1; q < d; ++q) J.set(p, q, upper[k++]);
  }
  return J;
}

void QuboInstance::validate() const {
  if (d < 0 || J.d() != d || static_cast<int>(h.size()) != d || static_cast<int>(index_map.size()) != d) {
    throw std::invalid_argument("QUBO instance: inconsistent dimensions");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("QUBO instance: beta must lie in [0,1]");
}

std::vector<double> importance(const FeatureRecord& record, const FeatureShape& shape) {
  std::vector<double> alpha(shape.nf, 0.0);
  const double cells = static_cast<double>(shape.plane());
  for (int a = 0; a < shape.nf; ++a) {
    double sum = 0.0;
    for (float g : record.gradient_map(a, shape)) sum += g;
    alpha[a] = sum / cells;
  }
  return alpha;
}

FilteredFeatures filter_positive(const FeatureRecord& record, const FeatureShape& shape,
                                 std::vector<double> alpha) {
  if (static_cast<int>(alpha.size()) != shape.nf) throw std::invalid_argument("alpha length != nf");
  FilteredFeatures out;
  auto& imp = out.importance;
  for (int a = 0; a < shape.nf; ++a) {
    if (alpha[a] > 0.0) {
      imp.filtered_indices.push_back(a);
      imp.alpha_filtered.push_back(alpha[a]);
      auto m = record.activation_map(a, shape);
      out.maps.emplace_back(m.begin(), m.end());
    }
  }
  imp.alpha = std::move(alpha);
  if (imp.filtered_indices.empty()) throw EmptySelection(record.image_id);
  const double top = *std::max_element(imp.alpha_filtered.begin(), imp.alpha_filtered.end());
  for (double a : imp.alpha_filtered) imp.h.push_back(a / top);
  return out;
}

SimilarityMatrix cosine_matrix(std::span<const std::vector<double>> maps) {
  const int d = static_cast<int>(maps.size());
  std::vector<double> norms(d);
  for (int p = 0; p < d; ++p) {
    double s = 0.0;
    for (double v : maps[p]) s += v * v;
    norms[p] = std::sqrt(s);
  }
  SimilarityMatrix J(d);
  for (int p = 0; p < d; ++p) {
    for (int q = p + 1; q < d; ++q) {
      if (norms[p] == 0.0 || norms[q] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < maps[p].size(); ++k) dot += maps[p][k] * maps[q][k];
      J.set(p, q, std::min(1.0, std::abs(dot) / (norms[p] * norms[q])));
    }
  }
  return J;
}

QuboInstance assemble_qubo(SimilarityMatrix J, std::vector<double> h, double beta, std::vector<int> index_map) {
  QuboInstance q;
  q.d = static_cast<int>(h.size());
  q.J = std::move(J);
  q.h = std::move(h);
  q.beta = beta;
  q.index_map = std::move(index_map);
  q.validate();
  return q;
}

QuboInstance build_qubo(const FeatureRecord& record, const FeatureShape& shape, double beta) {
  auto filtered = filter_positive(record, shape, importance(record, shape));
  auto q = assemble_qubo(cosine_matrix(filtered.maps), filtered.importance.h, beta,
                         filtered.importance.filtered_indices);
  q.image_id = record.image_id;
  q.class_label = record.class_label;
  return q;
}

double energy(const QuboInstance& instance, const Bitstring& z) {
  if (static_cast<int>(z.size()) != instance.d) {
    throw std::invalid_argument("bitstring length " + std::to_string(z.size()) + " != d = " +
                                std::to_string(instance.d));
  }
  double quadratic = 0.0, linear = 0.0;
  for (int p = 0; p < instance.d; ++p) {
    if (!z[p]) continue;
    linear += instance.h[p];
    for (int q = 0; q < instance.d; ++q) {
      if (q != p && z[q]) quadratic += instance.J(p, q);
    }
  }
  return (1.0 - instance.beta) * 0.5 * quadratic - instance.beta * linear;
}

std::vector<int> selected_indices(const QuboInstance& instance, const Bitstring& z) {
  std::vector<int> out;
  for (int p = 0; p < instance.d && p < static_cast<int>(z.size()); ++p) {
    if (z[p]) out.push_back(instance.index_map[p]);
  }
  return out;
}

std::string to_json_line(const QuboInstance& instance) {
  json j = {{"image_id", instance.image_id}, {"class", instance.class_label},
            {"d", instance.d},               {"beta", instance.beta},
            {"index_map", instance.index_map}, {"h", instance.h},
            {"J_upper", instance.J.upper_triangle()}};
  return j.dump();
}

QuboInstance qubo_from_json_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    const int d = j.at("d").get<int>();
    auto upper = j.at("J_upper").get<std::vector<double>>();
    auto q = assemble_qubo(SimilarityMatrix::from_upper_triangle(d, upper), j.at("h").get<std::vector<double>>(),
                           j.at("beta").get<double>(), j.at("index_map").get<std::vector<int>>());
    q.image_id = j.at("image_id").get<std::string>();
    q.class_label = j.at("class").get<int>();
    return q;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed QUBO document: ") + e.what());
  }
}

void write_qubo_file(std::span<const QuboInstance> instances, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& q : instances) out << to_json_line(q) << '\n';
}

std::vector<QuboInstance> read_qubo_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<QuboInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(qubo_from_json_line(line));
  }
  return out;
}

}  // namespace qfs
