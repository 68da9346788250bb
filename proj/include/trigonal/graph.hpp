#pragma once

#include <cstdint>
#include <vector>

#include "trigonal/surface.hpp"

namespace trigonal {

enum class VertexOrigin { net, crossing, boundary, barycenter };
enum class EdgeOrigin { geodesic, boundary, diagonal, tree_extension };

// Directed edge end. dir 0 points a->b, dir 1 points b->a.
struct Dart {
  int edge = -1;
  int dir = 0;
  friend bool operator==(const Dart&, const Dart&) = default;
};
inline int dart_id(Dart d) { return d.edge * 2 + d.dir; }
inline Dart dart_of(int id) { return {id / 2, id % 2}; }
inline Dart reversed(Dart d) { return {d.edge, 1 - d.dir}; }

struct GVertex {
  SurfacePoint p;
  VertexOrigin origin = VertexOrigin::net;
  bool on_surface_boundary = false;  // rotation is linear, not cyclic
};

struct GEdge {
  int a = -1, b = -1;
  EdgeOrigin origin = EdgeOrigin::geodesic;
  double length = 0;
  std::vector<SurfacePoint> polyline;  // oriented a -> b, endpoints included
};

// Metric graph embedded on a surface: geodesic-polyline edges, crossings as
// vertices, and a rotation system (CCW dart order per vertex).
struct EmbeddedGraph {
  std::vector<GVertex> vertices;
  std::vector<GEdge> edges;
  std::vector<std::vector<Dart>> rotation;

  int tail(Dart d) const { return d.dir == 0 ? edges[d.edge].a : edges[d.edge].b; }
  int head(Dart d) const { return d.dir == 0 ? edges[d.edge].b : edges[d.edge].a; }

  // Shortest-path field over edge lengths from `src` (loops ignored).
  std::vector<double> sssp(int src, std::vector<int>* parent = nullptr) const;
  double distance(int u, int v) const;
  bool connected() const;
};

// Cell decomposition: graph plus face walks from rotation-system tracing.
// Phantom walks along the surface boundary are excluded from `faces`.
struct CellDecomposition {
  EmbeddedGraph graph;
  std::vector<std::vector<Dart>> faces;
  int chi = 0;  // V - E + F

  int boundary_size(int f) const { return (int)faces[f].size(); }
};

}  // namespace trigonal
