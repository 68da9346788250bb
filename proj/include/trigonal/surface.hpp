#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trigonal/common.hpp"
#include "trigonal/geom2.hpp"

namespace trigonal {

// A point on the surface: triangle id plus barycentric coordinates.
// Canonical form: points on shared edges/vertices are expressed in the
// lowest incident triangle id, so equal points compare equal by key.
struct SurfacePoint {
  int tri = -1;
  std::array<double, 3> bary{0, 0, 0};
};

// Quantized identity of a canonical point. kind 0 = mesh vertex (i0 = vertex
// id), kind 1 = edge interior (i0 = edge id, q = param * 1e9), kind 2 = face
// interior (i0 = tri, q/q2 = two barys * 1e9).
struct PointKey {
  int kind = 2;
  int i0 = -1;
  int64_t q = 0, q2 = 0;
  friend bool operator==(const PointKey&, const PointKey&) = default;
  friend auto operator<=>(const PointKey&, const PointKey&) = default;
};

struct PointKeyHash {
  size_t operator()(const PointKey& k) const {
    uint64_t h = (uint64_t)k.kind * 0x9e3779b97f4a7c15ULL;
    h ^= (uint64_t)(uint32_t)k.i0 + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= (uint64_t)k.q + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= (uint64_t)k.q2 + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return (size_t)h;
  }
};

struct GeodesicPath {
  std::vector<SurfacePoint> points;  // consecutive points share a triangle
  double length = 0;
};

struct Triangle {
  std::array<int, 3> v;       // corner ids, consistently oriented
  std::array<double, 3> len;  // len[k] = |v[k] -> v[(k+1)%3]|
};

struct MeshEdge {
  int a = -1, b = -1;  // a < b
  double len = 0;
  int tri[2] = {-1, -1};   // incident triangles (tri[1] = -1 on boundary)
  int side[2] = {-1, -1};  // side index within tri
  bool boundary() const { return tri[1] < 0; }
};

// One entry of the cyclic (or linear, on the boundary) triangle fan around a
// mesh vertex.
struct FanEntry {
  int tri = -1;
  int corner = -1;       // corner index of the vertex in tri
  double angle_off = 0;  // accumulated angle of the corner's first spoke
};

struct VertexFan {
  std::vector<FanEntry> entries;  // CCW order
  double total_angle = 0;         // cone angle (2*pi-ish for flat interior)
  bool boundary = false;
};

class NodeDijkstra;

// Piecewise-flat intrinsic triangle mesh. Immutable after construction; all
// queries are read-only and may run concurrently.
class Surface {
 public:
  // Builds from a consistent triangle soup with intrinsic lengths.
  // Validates: triangle inequality, edge manifoldness, matching lengths on
  // shared edges, connectivity, orientability.
  Surface(int vertex_count, std::vector<Triangle> tris,
          std::optional<std::vector<Vec3>> positions = std::nullopt,
          int steiner_level = 0, bool run_calibration = true);

  // For derived sub-surfaces (face lifts) that inherit the parent's slack
  // instead of re-calibrating.
  void set_delta(double d) { delta_ = d; }

  int vertex_count() const { return vertex_count_; }
  int triangle_count() const { return (int)tris_.size(); }
  int edge_count() const { return (int)edges_.size(); }
  const Triangle& tri(int t) const { return tris_[t]; }
  const MeshEdge& edge(int e) const { return edges_[e]; }
  int tri_edge(int t, int side) const { return tri_edges_[t][side]; }
  int neighbor(int t, int side) const;
  const std::vector<std::vector<int>>& boundary_loops() const {
    return boundary_loops_;
  }
  int euler_characteristic() const {
    return vertex_count_ - (int)edges_.size() + (int)tris_.size();
  }
  bool has_positions() const { return positions_.has_value(); }
  const std::vector<Vec3>& positions() const { return *positions_; }
  bool has_uv() const { return !uv_.empty(); }
  // per-triangle per-corner chart coordinates for planar exports
  const std::vector<std::array<Vec2, 3>>& uv() const { return uv_; }
  void set_uv(std::vector<std::array<Vec2, 3>> uv) { uv_ = std::move(uv); }

  double total_area() const;
  double max_edge_length() const;

  // --- refinement / accuracy ------------------------------------------
  int steiner_level() const { return steiner_level_; }
  // Documented distance slack: max relative overestimate of the node-graph
  // distance on a calibration set of flat two-triangle unfoldings.
  double delta() const { return delta_; }
  // Max distance from any surface point to the nearest graph node (pool
  // density radius); used as sampling slack in region audits.
  double node_density_radius() const { return node_density_radius_; }

  // --- node graph (vertices + Steiner points on edges) -----------------
  int steiner_per_edge() const { return steiner_per_edge_; }
  int node_count() const { return node_count_; }
  SurfacePoint node_point(int node) const;
  // node id if the point coincides with a graph node (within 1e-9 of param)
  std::optional<int> point_node(const SurfacePoint& p) const;
  // raw graph adjacency, exposed for the independent Dijkstra oracle
  const std::vector<int>& graph_offsets() const { return csr_off_; }
  const std::vector<int>& graph_targets() const { return csr_adj_; }
  const std::vector<double>& graph_weights() const { return csr_w_; }
  const std::vector<int>& graph_arc_tris() const { return csr_tri_; }

  // --- geometry helpers -------------------------------------------------
  std::array<Vec2, 3> layout(int t) const;  // CCW planar layout
  double corner_angle(int t, int c) const { return corner_angles_[t][c]; }
  const VertexFan& fan(int v) const { return fans_[v]; }
  Vec2 point_in_layout(const SurfacePoint& p, int t) const;
  std::vector<int> incident_tris(const SurfacePoint& p) const;
  SurfacePoint canonical(const SurfacePoint& p) const;
  SurfacePoint canonical_vertex_point(int v) const;
  PointKey key(const SurfacePoint& p) const;
  // Re-expresses p (which must lie on an edge or vertex of t's closure or
  // inside t) in triangle t's barycentric coordinates.
  SurfacePoint rebase(const SurfacePoint& p, int t) const;
  Vec3 position(const SurfacePoint& p) const;  // requires has_positions()

  // --- distance queries ---------------------------------------------------
  // Straightened geodesic estimate: d_true <= result <= d_true*(1+delta()).
  double geodesic_distance(const SurfacePoint& p, const SurfacePoint& q) const;
  GeodesicPath geodesic_path(const SurfacePoint& p, const SurfacePoint& q) const;
  // Raw node-graph distance (no straightening); oracle-comparable layer.
  double node_graph_distance(int node_a, int node_b) const;

  // Exactly the candidates strictly within distance r of p.
  std::vector<int> ball_points(const SurfacePoint& p, double r,
                               const std::vector<SurfacePoint>& candidates) const;

  // Certified-by-construction lower bound on the length of the shortest
  // cycle that is nontrivial in first homology of the mesh graph; nullopt
  // when first homology is trivial ("simply connected" marker).
  std::optional<double> systole_lower_bound() const;

  // Max over sampled point pairs (region vertices + edge midpoints) of
  // shortest-path distance computed within the region only.
  double region_intrinsic_diameter(const std::vector<int>& region_tris) const;

  // Internal straightening entry: funnel-shortens a node path. Exposed for
  // the skeleton builder which reuses Dijkstra parents.
  GeodesicPath straighten_node_path(const SurfacePoint& src,
                                    const SurfacePoint& dst,
                                    const std::vector<int>& nodes,
                                    const std::vector<int>* region = nullptr) const;

  friend class NodeDijkstra;

 private:
  void build_edges();
  void orient_consistently();
  void build_boundary_loops();
  void build_fans();
  void build_node_graph();
  void calibrate();

  int vertex_count_ = 0;
  std::vector<Triangle> tris_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<MeshEdge> edges_;
  std::vector<std::vector<int>> boundary_loops_;  // edge ids, in loop order
  std::optional<std::vector<Vec3>> positions_;
  std::vector<std::array<Vec2, 3>> uv_;
  std::vector<std::array<double, 3>> corner_angles_;
  std::vector<VertexFan> fans_;

  int steiner_level_ = 0;
  int steiner_per_edge_ = 0;  // 2^level - 1
  int node_count_ = 0;
  std::vector<int> csr_off_, csr_adj_;
  std::vector<double> csr_w_;
  std::vector<int> csr_tri_;  // chord triangle, or -(e+1) for along-edge arcs

  double delta_ = 1e-9;
  double node_density_radius_ = 0;
};

// Builtin generators. Resolution semantics are documented per generator.
Surface make_flat_square(double w, double h, int res);
Surface make_flat_torus(double w, double h, int res);
Surface make_icosphere(double r, int subdiv);
Surface make_saddle(double a, int res);
Surface make_cylinder(double r, double h, int res);
Surface generate_builtin(const std::string& spec);

// Returns a surface with `level` more rounds of Steiner subdivision on every
// edge (2^level pieces); the intrinsic metric is unchanged. level <= 8 total.
Surface refine(const Surface& s, int level);

// Single-source shortest paths over the node graph, with optional virtual
// endpoints at arbitrary surface points, radius cap and region mask.
class NodeDijkstra {
 public:
  explicit NodeDijkstra(const Surface& s);

  struct Options {
    double radius_cap = -1;              // stop expanding beyond this dist
    const std::vector<char>* tri_mask = nullptr;  // allowed triangles
    int target_node = -1;                // early exit when settled
  };

  // Run from a set of source nodes (dist 0 each).
  void run_nodes(const std::vector<int>& sources, const Options& opt);
  void run_nodes(const std::vector<int>& sources) { run_nodes(sources, Options{}); }
  // Run from an arbitrary point (virtual source arcs into its triangles).
  void run_point(const SurfacePoint& src, const Options& opt);
  void run_point(const SurfacePoint& src) { run_point(src, Options{}); }

  bool reached(int node) const { return dist_[node] < kInf; }
  double dist(int node) const { return dist_[node]; }
  int parent(int node) const { return parent_[node]; }
  const std::vector<int>& touched() const { return touched_; }
  // Node chain from source to node (source-side first; virtual source not
  // included).
  std::vector<int> path_nodes(int node) const;
  // Distance of the current field to an arbitrary point (virtual target),
  // and the settled node realizing it.
  double eval_point(const SurfacePoint& dst,
                    const std::vector<char>* tri_mask) const;
  int eval_point_node(const SurfacePoint& dst,
                      const std::vector<char>* tri_mask) const;

  static constexpr double kInf = 1e100;

 private:
  void reset();
  void drain(const Options& opt);
  void seed_point(const SurfacePoint& src, const Options& opt);
  bool arc_allowed(int code, const Options& opt) const;

  const Surface& s_;
  std::vector<double> dist_;
  std::vector<int> parent_;
  std::vector<char> seen_;
  std::vector<int> touched_;
  std::vector<std::pair<double, int>> heap_;
};

}  // namespace trigonal
