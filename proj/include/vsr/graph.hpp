#ifndef VSR_GRAPH_HPP
#define VSR_GRAPH_HPP

#include <string>
#include <utility>
#include <vector>

#include "vsr/kernels.hpp"
#include "vsr/tensor.hpp"

namespace vsr {

// Canonical 117-point lip/jaw template layout: four closed contour rings
// (outer lip, inner lip, two surrounding rings) and an open jaw chain.
namespace lip_template {
constexpr int kOuterBegin = 0, kOuterEnd = 24;
constexpr int kInnerBegin = 24, kInnerEnd = 44;
constexpr int kRing1Begin = 44, kRing1End = 72;
constexpr int kRing2Begin = 72, kRing2End = 96;
constexpr int kJawBegin = 96, kJawEnd = 117;
constexpr int kPointCount = 117;
}  // namespace lip_template

struct LipGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, i < j, unique
  Tensor adjacency;                        // [n,n], D^-1/2 (A+I) D^-1/2
};

// Contour chain: node index ranges with closed/open flag.
struct Chain {
  int begin = 0;
  int end = 0;
  bool closed = true;
};

// The five canonical chains for the 117-point layout.
std::vector<Chain> canonical_lip_chains();

// Synthetic mean positions for the canonical layout, in [0,1]^2 with y
// growing downward. Shipped as data/lip_template_117.txt.
Tensor canonical_lip_template();

// Template file IO: one "index x y" line per node, '#' comments allowed.
Tensor load_landmark_template(const std::string& path);
void save_landmark_template(const Tensor& points, const std::string& path);

// Contour-chain edges (when chains apply) unioned with k-nearest-neighbor
// edges on the mean positions, symmetrized; connectivity is enforced by
// bridging the closest cross-component pair. For 117 points the canonical
// chains are used; other sizes get a pure kNN graph.
LipGraph build_lip_adjacency(const Tensor& mean_positions, int k);
LipGraph build_lip_adjacency(const Tensor& mean_positions, int k,
                             const std::vector<Chain>& chains);

// D^-1/2 (A+I) D^-1/2 over the binary adjacency of the edge list.
Tensor normalize_adjacency(const std::vector<std::pair<int, int>>& edges,
                           int node_count);

bool graph_is_connected(const std::vector<std::pair<int, int>>& edges,
                        int node_count);

// CSR view of a dense symmetric matrix, dropping zeros.
kernels::SparseMatrix to_sparse(const Tensor& dense);

}  // namespace vsr

#endif  // VSR_GRAPH_HPP
