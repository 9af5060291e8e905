#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>

#include "bergman/measure.hpp"

// The Bergman tree T_n with parameter lambda: level-N nodes live on the
// Bergman sphere S_{lambda N} (Euclidean radius tanh(lambda N)), each with a
// sphere anchor z_j^N, a Borel sphere cell Q_j^N, the ball cell
//   K_j^N = { lambda N <= d(0,z) < lambda (N+1), P_{lambda N} z in Q_j^N },
// and the center c_j^N = P_{lambda (N+1/2)} z_j^N.  Level N+1 nodes are
// parented to the level-N node whose sphere cell contains the radial
// projection of their center; the root cell is { d(0,z) < lambda }.
//
// For n = 1 the sphere cells are exact arcs (generic mode: arc spacing
// ~ slack * lambda; dyadic mode: 2^k arcs per level, the classical dyadic
// "top-half" decomposition).  For n >= 2 anchors come from a greedy maximal
// lambda-separated net over a seeded candidate pool and cells are
// nearest-anchor (Bergman) Voronoi cells, ties to the lowest index.

namespace bergman {

enum class TreeMode { GenericNet, Dyadic };

struct TreeConfig {
  int n = 1;
  double lambda = 0.5 * 0.6931471805599453;  // ln2 / 2
  int depth = 6;                              // rho: max level
  TreeMode mode = TreeMode::GenericNet;       // Dyadic requires n = 1
  std::uint64_t seed = 20240718ULL;           // net pool + cell samples (n >= 2)
  double pool_factor = 48.0;  // candidate pool = factor * previous level count
  double net_slack = 1.02;    // n = 1 generic: target arc spacing / lambda
  int samples_per_node = 200; // n >= 2: cached per-cell geometry samples
};

struct TreeNode {
  int id = 0;
  int level = 0;
  int index = 0;
  int parent = -1;
  std::vector<int> children;
  Point anchor;  // on S_{lambda N}; origin for the root
  Point center;  // P_{lambda(N+1/2)} anchor; origin for the root
  double th1 = 0.0, th2 = 0.0;  // n = 1: sphere-cell arc [th1, th2)
};

struct OutOfDepthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class BergmanTree {
 public:
  TreeConfig cfg;
  std::vector<TreeNode> nodes;            // ordered by (level, index); id = position
  std::vector<std::vector<int>> levels;   // node ids per level, index order

  // n >= 2 cached geometry: per-node dv_0 shell samples and per-level totals.
  std::vector<std::vector<Point>> samples;   // empty for n = 1
  std::vector<long> level_sample_count;      // draws per level (n >= 2)

  const TreeNode& node(int id) const { return nodes.at(id); }
  int root_id() const { return 0; }
  int node_count() const { return int(nodes.size()); }

  // u = |z|^2 annulus of level N
  double level_u1(int N) const;
  double level_u2(int N) const;

  PolarBox cell_box(int id) const;   // n = 1 only
  Region cell_region(int id) const;  // exact box (n=1) or membership (n>=2)
};

BergmanTree build_tree(const TreeConfig& cfg);

// Anchors of the level-N net only (exposed for net-quality tests).
std::vector<Point> build_sphere_net(const TreeConfig& cfg, int N);

// Index of the level-N sphere cell containing the radial projection of the
// unit direction `dir`.
int locate_direction(const BergmanTree& tree, int level, const Point& dir);

// The unique node with z in K_alpha.  Throws OutOfDepthError beyond depth.
int locate_cell(const BergmanTree& tree, const Point& z);

// N_alpha^R = { omega : D(c_alpha, R) meets K_omega }: center-distance
// prefilter plus cell sampling.  Always contains alpha.
std::vector<int> bergman_neighbors(const BergmanTree& tree, int id, double R);

// bdd N_alpha^R = { omega : d(omega) = d(alpha),
//                   beta(c_alpha/|c_alpha|, c_omega/|c_omega|) < R e^{-lambda d} }.
std::vector<int> boundary_neighbors(const BergmanTree& tree, int id, double R);

// Q_alpha = (union of K_omega over omega in N_alpha^{6 lambda}) u (children).
std::vector<int> region_Q_nodes(const BergmanTree& tree, int id);

// S~_alpha = union over omega in N_alpha^R of K_omega and all descendants.
// truncated (if given) reports whether the union hit the depth cutoff.
std::vector<int> region_S_nodes(const BergmanTree& tree, int id, double R,
                                bool* truncated = nullptr);

Region region_from_nodes(const BergmanTree& tree, const std::vector<int>& ids);
Region region_Q(const BergmanTree& tree, int id);
Region region_S(const BergmanTree& tree, int id, double R, bool* truncated = nullptr);

// v_gamma(K_alpha): closed form for n = 1, reweighted cached samples for
// n >= 2.
double cell_volume(const BergmanTree& tree, int id, const WeightedMeasure& meas);
double nodes_volume(const BergmanTree& tree, const std::vector<int>& ids,
                    const WeightedMeasure& meas);

// Inradius / circumradius of the cell about its center, from boundary
// sampling (n = 1: exact box faces; n >= 2: own and foreign cached samples).
struct CellRadii {
  double inner;
  double outer;
};
CellRadii estimate_cell_radii(const BergmanTree& tree, int id);

struct ColorClass {
  int l;                     // class id
  std::vector<int> members;  // node ids
  int M;                     // separation scale
};

// Partition of the node set: level residues mod (M+1) crossed with greedy
// beta-separated subclasses per level, so that two distinct members always
// satisfy |d(a)-d(b)| > M, or d(a) = d(b) with
// beta(c_a/|c_a|, c_b/|c_b|) > M e^{-lambda d(a)}.
std::vector<ColorClass> color_decompose(const BergmanTree& tree, int M);

struct Chain {
  std::vector<int> members;  // eta_1 ... eta_L, one level, all distinct
};

// Same-level chain from alpha to nu along the boundary path
// p(t) = ((1-t) + t kappa) e_alpha + sqrt(1 - |(1-t) + t kappa|^2) c_perp:
// consecutive members are 6 lambda-neighbors, so consecutive Q's overlap in
// at least one full cell.
Chain build_chain(const BergmanTree& tree, int alpha, int nu);

// One node per line: {level, index, anchor, center, parent, children},
// ordered by (level, index).
void export_jsonl(const BergmanTree& tree, std::ostream& os);

}  // namespace bergman
