#pragma once

#include <vector>

#include "trigonal/graph.hpp"
#include "trigonal/net.hpp"

namespace trigonal {

// Unordered net-point index pairs at surface distance strictly below Theta.
std::vector<std::pair<int, int>> close_pairs(const Surface& s, const Net& net,
                                             double big_theta);

// The embedded skeleton: one geodesic edge per close pair, boundary loops
// split at the net's boundary points, crossings resolved into vertices, and
// the rotation system computed. Requires the tame regime: simply connected
// or Theta < systole/4.
EmbeddedGraph build_skeleton(const Surface& s, const Net& net,
                             double big_theta);

// Curve soup -> embedded graph with all crossings resolved. Exposed for the
// triangulator (diagonal insertion) and tests.
struct InputCurve {
  std::vector<SurfacePoint> points;
  EdgeOrigin origin = EdgeOrigin::geodesic;
  double length = -1;  // recomputed from charts when < 0
};
EmbeddedGraph resolve_crossings(const Surface& s,
                                const std::vector<InputCurve>& curves,
                                const std::vector<SurfacePoint>& net_points);

// Faces by next-dart tracing; checks Euler characteristic against the
// surface and drops the phantom boundary walks.
CellDecomposition trace_faces(const Surface& s, EmbeddedGraph g);

}  // namespace trigonal
