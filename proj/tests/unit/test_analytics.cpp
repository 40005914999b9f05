#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "qfs/analytics.hpp"
#include "qfs/text_io.hpp"

using namespace qfs;
using doctest::Approx;

namespace {

SelectionResult selecting(int class_label, std::vector<int> indices) {
  SelectionResult s;
  s.class_label = class_label;
  s.selected_fm_indices = std::move(indices);
  return s;
}

FeatureRecord two_map_record(std::vector<float> f0, std::vector<float> f1) {
  FeatureRecord r;
  r.image_id = "h";
  r.activations = f0;
  r.activations.insert(r.activations.end(), f1.begin(), f1.end());
  r.gradients.assign(r.activations.size(), 1.0f);
  return r;
}

}  // namespace

TEST_CASE("class distribution of a single image") {
  const std::vector<SelectionResult> sel{selecting(0, {0, 1})};
  const auto d = class_distributions(sel, 1, 4);
  CHECK(d[0].p == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  CHECK(d[0].support_count == 2);
  CHECK(d[0].image_count == 1);
}

TEST_CASE("class distribution pools images of a class") {
  const std::vector<SelectionResult> sel{selecting(1, {0}), selecting(1, {1}), selecting(0, {3})};
  const auto d = class_distributions(sel, 3, 4);
  CHECK(d[1].p == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  CHECK(d[0].p == std::vector<double>{0.0, 0.0, 0.0, 1.0});
  CHECK(d[2].empty());
  CHECK(std::accumulate(d[2].p.begin(), d[2].p.end(), 0.0) == 0.0);
}

TEST_CASE("selections outside the class or map range are rejected") {
  CHECK_THROWS_AS(class_distributions(std::vector{selecting(2, {0})}, 2, 4), std::invalid_argument);
  CHECK_THROWS_AS(class_distributions(std::vector{selecting(0, {4})}, 2, 4), std::invalid_argument);
}

TEST_CASE("Bhattacharyya coefficient examples") {
  const std::vector<double> p{0.5, 0.5, 0.0}, q{0.0, 0.5, 0.5}, r{0.0, 0.0, 1.0};
  CHECK(bhattacharyya(p, p) == Approx(1.0));
  CHECK(bhattacharyya(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(bhattacharyya(p, q) == Approx(0.5));
  CHECK(bhattacharyya(p, r) == 0.0);
}

TEST_CASE("Bhattacharyya properties on random distributions") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 30;
    const auto p = testing::random_distribution(rng, n);
    const auto q = testing::random_distribution(rng, n);
    const double pq = bhattacharyya(p, q);
    REQUIRE(pq == bhattacharyya(q, p));
    REQUIRE((pq >= 0.0 && pq <= 1.0));
    REQUIRE(std::abs(bhattacharyya(p, p) - 1.0) < 1e-12);
    if (p != q) REQUIRE(pq < 1.0 - 1e-12);
  }
}

TEST_CASE("correlation matrix keeps raw values and thresholds the display") {
  ClassDistribution a{0, {0.995, 0.005, 0.0}, 1, 1};
  ClassDistribution b{1, {0.0, 0.995, 0.005}, 1, 1};
  // sqrt(0.005 * 0.995) ~ 0.0705 falls under the display threshold.
  const auto m = correlation_matrix(std::vector{a, b});
  CHECK(m(0, 1) == Approx(std::sqrt(0.005 * 0.995)));
  CHECK(m(0, 1) < 0.10);
  CHECK(m.display(0, 1) == 0.0);
  CHECK(m(0, 0) == Approx(1.0));
  CHECK(m.display(0, 0) == Approx(1.0));
  CHECK(m.display_threshold == 0.10);
}

TEST_CASE("identical and disjoint class distributions") {
  ClassDistribution a{0, {0.2, 0.8}, 5, 2};
  ClassDistribution b{1, {0.2, 0.8}, 5, 2};
  const auto same = correlation_matrix(std::vector{a, b});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(same(i, j) == Approx(1.0));
  ClassDistribution c{0, {1.0, 0.0, 0.0}, 2, 2};
  ClassDistribution d{1, {0.0, 0.5, 0.5}, 2, 2};
  const auto disjoint = correlation_matrix(std::vector{c, d});
  CHECK(disjoint.display(0, 0) == Approx(1.0));
  CHECK(disjoint.display(1, 1) == Approx(1.0));
  CHECK(disjoint.display(0, 1) == 0.0);
}

TEST_CASE("empty classes have empty rows") {
  ClassDistribution a{0, {1.0, 0.0}, 1, 1};
  ClassDistribution empty{1, {0.0, 0.0}, 0, 0};
  const auto m = correlation_matrix(std::vector{a, empty});
  CHECK(m.empty_class[1]);
  CHECK(m(1, 1) == 0.0);
  CHECK(m(0, 1) == 0.0);
}

TEST_CASE("relabeling classes permutes the correlation matrix") {
  std::mt19937_64 rng(2);
  std::vector<ClassDistribution> dists;
  for (int c = 0; c < 5; ++c) dists.push_back({c, testing::random_distribution(rng, 8), 10, 3});
  const std::vector<int> perm{3, 0, 4, 1, 2};
  std::vector<ClassDistribution> relabeled(5);
  for (int c = 0; c < 5; ++c) {
    relabeled[perm[c]] = dists[c];
    relabeled[perm[c]].class_label = perm[c];
  }
  const auto m = correlation_matrix(dists);
  const auto pm = correlation_matrix(relabeled);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) CHECK(pm(perm[a], perm[b]) == m(a, b));
}

TEST_CASE("coupling moments recover a Gaussian") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.4, 0.1);
  std::vector<double> x(100000);
  for (auto& v : x) v = g(rng);
  const auto fit = fit_j_distribution(x);
  CHECK(std::abs(fit.mu - 0.4) < 0.004);
  CHECK(std::abs(fit.sigma - 0.1) < 0.001);
  std::int64_t total = 0;
  for (const auto& b : fit.histogram) {
    CHECK(b.hi > b.lo);
    total += b.count;
  }
  CHECK(total == 100000);
  // Freedman-Diaconis width 2 IQR n^(-1/3); IQR of N(0.4, 0.1) is about 0.1349.
  const double width = fit.histogram.front().hi - fit.histogram.front().lo;
  CHECK(width == Approx(2 * 0.1349 * std::pow(1e5, -1.0 / 3.0)).epsilon(0.03));
}

TEST_CASE("constant couplings have zero spread") {
  const std::vector<double> x(50, 0.3);
  const auto fit = fit_j_distribution(x);
  CHECK(fit.mu == Approx(0.3));
  CHECK(fit.sigma == 0.0);
  CHECK(fit.n == 50);
  REQUIRE(fit.histogram.size() == 1);
  CHECK(fit.histogram[0].count == 50);
  CHECK_THROWS_AS(fit_j_distribution(std::vector<double>(10, 0.3)), std::invalid_argument);
}

TEST_CASE("off-diagonal couplings skip the diagonal") {
  SimilarityMatrix J(3);
  J.set(0, 1, 0.1);
  J.set(0, 2, 0.2);
  J.set(1, 2, 0.3);
  const auto q = assemble_qubo(J, {1, 1, 1}, 0.7, {0, 1, 2});
  CHECK(off_diagonal_couplings(q) == std::vector<double>{0.1, 0.2, 0.3});
}

TEST_CASE("heat map of one selected map is the normalized map") {
  const FeatureShape shape{2, 1, 3};
  const auto r = two_map_record({1, 4, 2}, {9, 9, 9});
  const std::vector<double> alpha{1.0, 1.0};
  const auto m = heatmap(r, shape, alpha, selecting(0, {0}));
  CHECK(m.heat == std::vector<double>{0.25, 1.0, 0.5});
  CHECK_FALSE(m.all_zero);
}

TEST_CASE("heat map of an empty selection is all zero") {
  const FeatureShape shape{2, 1, 2};
  const auto r = two_map_record({1, 0}, {0, 1});
  const auto m = heatmap(r, shape, std::vector<double>{1.0, 1.0}, selecting(0, {}));
  CHECK(m.all_zero);
  CHECK(m.heat == std::vector<double>{0.0, 0.0});
}

TEST_CASE("heat map sums the selected maps") {
  const FeatureShape shape{2, 1, 2};
  const auto r = two_map_record({1, 0}, {0, 1});
  const auto m = heatmap(r, shape, std::vector<double>{1.0, 1.0}, selecting(0, {0, 1}));
  CHECK(m.heat == std::vector<double>{1.0, 1.0});
}

TEST_CASE("heat map clamps negative evidence and ignores the scale of alpha") {
  std::mt19937_64 rng(4);
  const int d = 6;
  const FeatureShape shape{d, 4, 4};
  const auto r = testing::random_record(rng, d);
  std::vector<double> alpha{0.3, -0.5, 0.8, 0.1, -0.2, 0.6};
  const auto sel = selecting(0, {0, 1, 2, 4});
  const auto a = heatmap(r, shape, alpha, sel);
  for (auto& v : alpha) v *= 7.5;
  const auto b = heatmap(r, shape, alpha, sel);
  for (std::size_t k = 0; k < a.heat.size(); ++k) {
    CHECK(a.heat[k] == Approx(b.heat[k]).epsilon(1e-12));
    CHECK((a.heat[k] >= 0.0 && a.heat[k] <= 1.0));
  }
}

TEST_CASE("bilinear resize") {
  const std::vector<double> src{0.0, 1.0};
  const auto up = bilinear_resize(src, 1, 2, 1, 4);
  // Half-pixel centres: outputs sample x = -0.25, 0.25, 0.75, 1.25, clamped at the edges.
  CHECK(up[0] == 0.0);
  CHECK(up[1] == Approx(0.25));
  CHECK(up[2] == Approx(0.75));
  CHECK(up[3] == 1.0);
  const std::vector<double> flat(9, 0.4);
  for (double v : bilinear_resize(flat, 3, 3, 7, 5)) CHECK(v == Approx(0.4));
  CHECK(bilinear_resize(src, 1, 2, 1, 2) == src);
}

TEST_CASE("upsampled heat map stays in [0,1]") {
  const FeatureShape shape{2, 2, 2};
  FeatureRecord r;
  r.activations = {1, 0, 0, 0.5f, 0, 0, 0, 0};
  r.gradients.assign(8, 1.0f);
  const auto m = heatmap(r, shape, std::vector<double>{1, 1}, selecting(0, {0}), std::pair{9, 11});
  CHECK(m.up_height == 9);
  CHECK(m.up_width == 11);
  CHECK(m.upsampled.size() == 99);
  CHECK(*std::max_element(m.upsampled.begin(), m.upsampled.end()) <= 1.0);
  CHECK(*std::min_element(m.upsampled.begin(), m.upsampled.end()) >= 0.0);
}

TEST_CASE("PGM output stores round(255 * heat)") {
  testing::TempDir dir("pgm");
  write_pgm(std::vector<double>{0.0, 0.5, 1.0, 0.2}, 2, 2, dir / "m.pgm");
  const std::string bytes = testing::read_file(dir / "m.pgm");
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(bytes.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 0]) == 0);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 128);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 255);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 3]) == 51);
}

TEST_CASE("matrix CSV has a header row and round-trips values") {
  testing::TempDir dir("csv");
  const std::vector<double> v{0.1, 1.0 / 3.0, -2.5, 1e-17};
  write_matrix_csv(v, 2, 2, dir / "m.csv");
  const auto t = read_csv(dir / "m.csv");
  CHECK(t.header == std::vector<std::string>{"c0", "c1"});
  REQUIRE(t.rows.size() == 2);
  CHECK(std::stod(t.rows[0][1]) == 1.0 / 3.0);
  CHECK(std::stod(t.rows[1][1]) == 1e-17);
}

TEST_CASE("shortest round-trip number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 7.0)) == 1.0 / 7.0);
}
