#include <doctest.h>

#include <cmath>
#include <set>

#include "vsr/graph.hpp"
#include "vsr/rng.hpp"

using vsr::build_lip_adjacency;
using vsr::LipGraph;
using vsr::normalize_adjacency;
using vsr::Tensor;

namespace {

// power iteration estimate of the spectral radius of a symmetric matrix
double spectral_radius(const Tensor& a) {
  const int n = a.dim(0);
  std::vector<double> v(static_cast<std::size_t>(n), 1.0 / std::sqrt(n));
  double lam = 0.0;
  for (int it = 0; it < 300; ++it) {
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        w[static_cast<std::size_t>(i)] +=
            a.at({i, j}) * v[static_cast<std::size_t>(j)];
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (auto& x : w) x /= norm;
    lam = norm;
    v = w;
  }
  return lam;
}

}  // namespace

TEST_CASE("normalize_adjacency basic values") {
  // isolated node: self loop only, degree 1
  Tensor a1 = normalize_adjacency({}, 1);
  CHECK(a1.at({0, 0}) == doctest::Approx(1.0));

  // two nodes, one edge: every entry of D^-1/2 (A+I) D^-1/2 is 1/2
  Tensor a2 = normalize_adjacency({{0, 1}}, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(a2.at({i, j}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalized adjacency is symmetric nonnegative with unit spectral radius bound") {
  vsr::Rng rng(5);
  Tensor pts({20, 2});
  for (auto& v : pts.data) v = rng.uniform(0.0, 1.0);
  for (int k : {1, 3, 7}) {
    LipGraph g = build_lip_adjacency(pts, k);
    const Tensor& a = g.adjacency;
    for (int i = 0; i < 20; ++i) {
      CHECK(a.at({i, i}) > 0.0);  // self loops from A+I
      for (int j = 0; j < 20; ++j) {
        CHECK(a.at({i, j}) >= 0.0);
        CHECK(a.at({i, j}) == doctest::Approx(a.at({j, i})));
      }
    }
    CHECK(spectral_radius(a) <= 1.0 + 1e-9);
    CHECK(vsr::graph_is_connected(g.edges, g.node_count));
  }
}

TEST_CASE("k=n-1 yields the complete graph") {
  vsr::Rng rng(6);
  Tensor pts({10, 2});
  for (auto& v : pts.data) v = rng.uniform(0.0, 1.0);
  LipGraph g = build_lip_adjacency(pts, 9);
  CHECK(static_cast<int>(g.edges.size()) == 10 * 9 / 2);
}

TEST_CASE("canonical template with k=116 gives the complete 117-point graph") {
  LipGraph g = build_lip_adjacency(vsr::canonical_lip_template(), 116);
  CHECK(static_cast<int>(g.edges.size()) == 117 * 116 / 2);
}

TEST_CASE("k=1 on collinear equally spaced points becomes a chain") {
  // brute-force expectation: each point links to an adjacent point, and
  // symmetrization yields exactly the path edges
  const int n = 6;
  Tensor pts({n, 2});
  for (int i = 0; i < n; ++i) {
    pts.at({i, 0}) = 0.1 * i;
    pts.at({i, 1}) = 0.5;
  }
  LipGraph g = build_lip_adjacency(pts, 1);
  std::set<std::pair<int, int>> expect;
  for (int i = 0; i + 1 < n; ++i) expect.insert({i, i + 1});
  std::set<std::pair<int, int>> got(g.edges.begin(), g.edges.end());
  CHECK(got == expect);
  CHECK(vsr::graph_is_connected(g.edges, n));
}

TEST_CASE("degenerate positions are rejected") {
  Tensor pts = Tensor::full({5, 2}, 0.25);
  CHECK_THROWS_AS(build_lip_adjacency(pts, 2), vsr::DegeneratePositions);
}

TEST_CASE("canonical template file round-trips") {
  Tensor tmpl = vsr::canonical_lip_template();
  const std::string path = "test_template_roundtrip.txt";
  vsr::save_landmark_template(tmpl, path);
  Tensor back = vsr::load_landmark_template(path);
  for (std::size_t i = 0; i < tmpl.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(tmpl.data[i]).epsilon(1e-9));
  for (double v : tmpl.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(vsr::load_landmark_template(path).dim(0) == 117);
  std::remove(path.c_str());
  CHECK_THROWS_AS(vsr::load_landmark_template("no_such_file.txt"),
                  vsr::MissingFile);
}

TEST_CASE("shipped template matches the generator") {
  // guards against the data file drifting from the code
  Tensor shipped;
  try {
    shipped = vsr::load_landmark_template(std::string(VSR_SOURCE_DIR) +
                                          "/data/lip_template_117.txt");
  } catch (const vsr::MissingFile&) {
    return;  // running outside the source tree
  }
  Tensor gen = vsr::canonical_lip_template();
  for (std::size_t i = 0; i < gen.data.size(); ++i)
    CHECK(shipped.data[i] == doctest::Approx(gen.data[i]).epsilon(1e-9));
}
