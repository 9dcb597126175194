#include "vsr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "vsr/errors.hpp"

namespace vsr {

std::vector<Chain> canonical_lip_chains() {
  using namespace lip_template;
  return {{kOuterBegin, kOuterEnd, true},
          {kInnerBegin, kInnerEnd, true},
          {kRing1Begin, kRing1End, true},
          {kRing2Begin, kRing2End, true},
          {kJawBegin, kJawEnd, false}};
}

namespace {

void fill_ring(Tensor& pts, int begin, int end, double cx, double cy, double a,
               double b) {
  const int n = end - begin;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    pts.at({begin + i, 0}) = cx + a * std::cos(th);
    pts.at({begin + i, 1}) = cy + b * std::sin(th);
  }
}

}  // namespace

Tensor canonical_lip_template() {
  using namespace lip_template;
  Tensor pts({kPointCount, 2});
  const double cx = 0.5, cy = 0.52;
  fill_ring(pts, kOuterBegin, kOuterEnd, cx, cy, 0.22, 0.10);
  fill_ring(pts, kInnerBegin, kInnerEnd, cx, cy, 0.14, 0.05);
  fill_ring(pts, kRing1Begin, kRing1End, cx, cy, 0.30, 0.16);
  fill_ring(pts, kRing2Begin, kRing2End, cx, cy, 0.40, 0.24);
  // jaw arc through the chin, left to right
  const int jaw_n = kJawEnd - kJawBegin;
  for (int i = 0; i < jaw_n; ++i) {
    const double th = M_PI - M_PI * i / (jaw_n - 1);
    pts.at({kJawBegin + i, 0}) = cx + 0.46 * std::cos(th);
    pts.at({kJawBegin + i, 1}) = cy + 0.40 * std::sin(th);
  }
  return pts;
}

Tensor load_landmark_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("landmark template not found: " + path);
  Tensor pts({lip_template::kPointCount, 2});
  std::vector<bool> seen(lip_template::kPointCount, false);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    int idx;
    double x, y;
    if (std::sscanf(line.c_str(), "%d %lf %lf", &idx, &x, &y) != 3)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'index x y'");
    if (idx < 0 || idx >= lip_template::kPointCount)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": index out of range");
    pts.at({idx, 0}) = x;
    pts.at({idx, 1}) = y;
    seen[static_cast<std::size_t>(idx)] = true;
  }
  for (int i = 0; i < lip_template::kPointCount; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw ParseError(path + ": missing node " + std::to_string(i));
  return pts;
}

void save_landmark_template(const Tensor& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write landmark template: " + path);
  out << "# lip/jaw landmark template, version 1\n";
  out << "# index x y (unit square, y grows downward)\n";
  char buf[80];
  for (int i = 0; i < points.dim(0); ++i) {
    std::snprintf(buf, sizeof buf, "%d %.10f %.10f\n", i, points.at({i, 0}),
                  points.at({i, 1}));
    out << buf;
  }
}

namespace {

double sq_dist(const Tensor& p, int i, int j) {
  const double dx = p.at({i, 0}) - p.at({j, 0});
  const double dy = p.at({i, 1}) - p.at({j, 1});
  return dx * dx + dy * dy;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

LipGraph build_lip_adjacency(const Tensor& mean_positions, int k) {
  const int n = mean_positions.dim(0);
  if (n == lip_template::kPointCount)
    return build_lip_adjacency(mean_positions, k, canonical_lip_chains());
  return build_lip_adjacency(mean_positions, k, {});
}

LipGraph build_lip_adjacency(const Tensor& mean_positions, int k,
                             const std::vector<Chain>& chains) {
  check_shape(mean_positions.ndim() == 2 && mean_positions.dim(1) == 2,
              "build_lip_adjacency: positions must be [N,2]");
  if (k < 1) throw Error("build_lip_adjacency: k must be >= 1");
  if (!mean_positions.all_finite())
    throw Error("build_lip_adjacency: positions must be finite");
  const int n = mean_positions.dim(0);

  double max_d = 0.0;
  for (int i = 1; i < n; ++i) max_d = std::max(max_d, sq_dist(mean_positions, 0, i));
  if (n > 1 && max_d == 0.0)
    throw DegeneratePositions("build_lip_adjacency: all points coincide");

  std::set<std::pair<int, int>> edges;
  auto add_edge = [&edges](int a, int b) {
    if (a == b) return;
    edges.emplace(std::min(a, b), std::max(a, b));
  };

  for (const Chain& c : chains) {
    for (int i = c.begin; i + 1 < c.end; ++i) add_edge(i, i + 1);
    if (c.closed && c.end - c.begin > 2) add_edge(c.begin, c.end - 1);
  }

  // k nearest neighbors by Euclidean distance, ties to the lower index
  const int kk = std::min(k, n - 1);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(sq_dist(mean_positions, i, j), j);
    std::sort(cand.begin(), cand.end());
    for (int c = 0; c < kk; ++c) add_edge(i, cand[static_cast<std::size_t>(c)].second);
  }

  // bridge components until connected
  UnionFind uf(n);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  for (;;) {
    double best = -1.0;
    std::pair<int, int> bridge{-1, -1};
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (uf.find(i) == uf.find(j)) continue;
        const double d = sq_dist(mean_positions, i, j);
        if (bridge.first < 0 || d < best) {
          best = d;
          bridge = {i, j};
        }
      }
    if (bridge.first < 0) break;
    add_edge(bridge.first, bridge.second);
    uf.unite(bridge.first, bridge.second);
  }

  LipGraph g;
  g.node_count = n;
  g.edges.assign(edges.begin(), edges.end());
  g.adjacency = normalize_adjacency(g.edges, n);
  return g;
}

Tensor normalize_adjacency(const std::vector<std::pair<int, int>>& edges,
                           int node_count) {
  Tensor a({node_count, node_count});
  for (const auto& [i, j] : edges) {
    check_shape(0 <= i && i < node_count && 0 <= j && j < node_count,
                "normalize_adjacency: edge index out of range");
    a.at({i, j}) = 1.0;
    a.at({j, i}) = 1.0;
  }
  for (int i = 0; i < node_count; ++i) a.at({i, i}) = 1.0;  // A + I
  std::vector<double> dinv(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) {
    double deg = 0.0;
    for (int j = 0; j < node_count; ++j) deg += a.at({i, j});
    dinv[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
  }
  for (int i = 0; i < node_count; ++i)
    for (int j = 0; j < node_count; ++j)
      a.at({i, j}) *= dinv[static_cast<std::size_t>(i)] *
                      dinv[static_cast<std::size_t>(j)];
  return a;
}

bool graph_is_connected(const std::vector<std::pair<int, int>>& edges,
                        int node_count) {
  if (node_count == 0) return true;
  UnionFind uf(node_count);
  for (const auto& [a, b] : edges) uf.unite(a, b);
  const int root = uf.find(0);
  for (int i = 1; i < node_count; ++i)
    if (uf.find(i) != root) return false;
  return true;
}

kernels::SparseMatrix to_sparse(const Tensor& dense) {
  check_shape(dense.ndim() == 2 && dense.dim(0) == dense.dim(1),
              "to_sparse: expects a square matrix");
  kernels::SparseMatrix m;
  m.n = dense.dim(0);
  m.row_ptr.assign(static_cast<std::size_t>(m.n) + 1, 0);
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      const double v = dense.at({i, j});
      if (v != 0.0) {
        m.col.push_back(j);
        m.val.push_back(v);
      }
    }
    m.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(m.col.size());
  }
  return m;
}

}  // namespace vsr
