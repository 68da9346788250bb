#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trigonal/surface.hpp"

namespace trigonal {

enum class NetKind { greedy, dyadic, bk };

// theta-separated, theta-dense point set on a surface. `theta_request` is the
// density parameter the net was built for (the QI-relevant theta);
// `theta_sep` is the realized minimum pairwise separation (boundary sweeps
// can force sub-theta gaps along loops, matching the union construction of
// interior and boundary nets); `theta_dense` is the verified density bound
// over the node pool.
struct Net {
  NetKind kind = NetKind::greedy;
  double theta_request = 0;
  double theta_sep = 0;
  double theta_dense = 0;
  uint64_t seed = 0;
  std::vector<SurfacePoint> points;
  std::vector<int> nodes;  // graph node ids, parallel to points
  // per boundary loop: indices into points, in loop order
  std::vector<std::vector<int>> boundary_chains;
};

Net build_net(const Surface& s, double theta, uint64_t seed);

// n(R) profile: for each R, max over net points of |X ∩ B(x;R)| (the point
// itself always counts). Monotone in R.
std::vector<std::pair<double, int>> check_uniformity(
    const Surface& s, const Net& net, const std::vector<double>& radii);

struct DyadicPatch {
  std::vector<int> tris;
  int order = 0;        // patch index n
  double density = 0;   // theta / 2^n target used for this patch
  int seed_vertex = 0;  // growth seed
};

struct DyadicBuild {
  Net net;
  std::vector<DyadicPatch> patches;
};

DyadicBuild build_dyadic_net(const Surface& s, double theta, double big_theta,
                             uint64_t seed);

struct BkTile {
  int i = 0, j = 0;
  double density = 0;
  double mass = 0;
  int count = 0;
};

struct BkBuild {
  Surface surface;
  Net net;
  int depth = 0;
  std::vector<BkTile> tiles;
};

// Nested-checkerboard density net on a flat square: density takes the two
// values base and base*(1+eps) according to the XOR of checkerboard parities
// across the `depth` dyadic scales; points placed by stratified jittered-grid
// sampling matching each tile's mass, snapped to graph nodes.
BkBuild build_bk_net(double width, double height, double base_density,
                     double eps, int depth, uint64_t seed);

}  // namespace trigonal
