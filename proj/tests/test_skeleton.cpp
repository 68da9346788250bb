#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <queue>
#include <set>

#include "trigonal/skeleton.hpp"

using namespace trigonal;

namespace {

Net manual_net(const Surface& s, const std::vector<SurfacePoint>& pts,
               double theta_request) {
  Net net;
  net.kind = NetKind::greedy;
  net.theta_request = theta_request;
  net.theta_sep = theta_request;
  net.theta_dense = theta_request;
  for (auto& p : pts) {
    SurfacePoint c = s.canonical(p);
    auto n = s.point_node(c);
    REQUIRE(n.has_value());
    net.points.push_back(c);
    net.nodes.push_back(*n);
  }
  return net;
}

SurfacePoint torus_point(const Surface& s, double x, double y) {
  for (int t = 0; t < s.triangle_count(); ++t) {
    const auto& u = s.uv()[t];
    double a = orient2d(u[0], u[1], u[2]);
    double b0 = orient2d(Vec2{x, y}, u[1], u[2]) / a;
    double b1 = orient2d(u[0], Vec2{x, y}, u[2]) / a;
    double b2 = 1 - b0 - b1;
    if (b0 >= -1e-12 && b1 >= -1e-12 && b2 >= -1e-12) {
      SurfacePoint p;
      p.tri = t;
      p.bary = {std::max(0.0, b0), std::max(0.0, b1), std::max(0.0, b2)};
      double sum = p.bary[0] + p.bary[1] + p.bary[2];
      for (auto& v : p.bary) v /= sum;
      return p;
    }
  }
  REQUIRE(false);
  return {};
}

// independent Dijkstra over an EmbeddedGraph (test oracle)
std::vector<double> oracle_graph_sssp(const EmbeddedGraph& g, int src) {
  std::vector<double> dist(g.vertices.size(), 1e100);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (size_t e = 0; e < g.edges.size(); ++e) {
      if (g.edges[e].a == g.edges[e].b) continue;
      int other = -1;
      if (g.edges[e].a == u) other = g.edges[e].b;
      if (g.edges[e].b == u) other = g.edges[e].a;
      if (other < 0) continue;
      if (d + g.edges[e].length < dist[other]) {
        dist[other] = d + g.edges[e].length;
        pq.push({dist[other], other});
      }
    }
  }
  return dist;
}

// exhaustive interior-disjointness audit: any proper crossing between the
// polylines of two distinct edges is a bug
void audit_interior_disjoint(const Surface& s, const EmbeddedGraph& g) {
  struct Seg {
    int edge;
    Vec2 a, b;
    int tri;
  };
  std::vector<std::vector<Seg>> bucket(s.triangle_count());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& pts = g.edges[e].polyline;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      auto ta = s.incident_tris(pts[i]);
      auto tb = s.incident_tris(pts[i + 1]);
      int t = -1;
      for (int x : ta)
        for (int y : tb)
          if (x == y && (t < 0 || x < t)) t = x;
      REQUIRE(t >= 0);
      bucket[t].push_back({(int)e, s.point_in_layout(pts[i], t),
                           s.point_in_layout(pts[i + 1], t), t});
    }
  }
  for (int t = 0; t < s.triangle_count(); ++t) {
    for (size_t x = 0; x < bucket[t].size(); ++x)
      for (size_t y = x + 1; y < bucket[t].size(); ++y) {
        const Seg& A = bucket[t][x];
        const Seg& B = bucket[t][y];
        if (A.edge == B.edge) continue;
        double la = dist(A.a, A.b), lb = dist(B.a, B.b);
        double eps = 1e-7 * std::max(la, lb);
        double d1 = orient2d(B.a, B.b, A.a);
        double d2 = orient2d(B.a, B.b, A.b);
        double d3 = orient2d(A.a, A.b, B.a);
        double d4 = orient2d(A.a, A.b, B.b);
        bool proper = ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
                      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
        CHECK(!proper);
      }
  }
}

}  // namespace

TEST_CASE("close pairs: strict threshold, singleton, brute-force oracle") {
  Surface s = refine(make_flat_torus(1, 1, 8), 2);

  // singleton
  Net single = manual_net(s, {s.canonical_vertex_point(0)}, 0.05);
  CHECK(close_pairs(s, single, 0.2).empty());

  // two nodes in a common triangle at distance exactly 0.0625 (binary-exact
  // chord) are excluded at Theta = 0.0625: the threshold is strict
  SurfacePoint a = torus_point(s, 0.25, 0.25);
  SurfacePoint b = torus_point(s, 0.3125, 0.25);
  Net duo = manual_net(s, {a, b}, 0.03);
  CHECK(s.geodesic_distance(a, b) == 0.0625);
  CHECK(close_pairs(s, duo, 0.0625).empty());
  CHECK(close_pairs(s, duo, 0.0626).size() == 1);

  // brute-force all-pairs filter
  Net net = build_net(s, 0.11, 17);
  double Theta = 0.24;
  auto pairs = close_pairs(s, net, Theta);
  std::set<std::pair<int, int>> got(pairs.begin(), pairs.end());
  for (size_t i = 0; i < net.points.size(); ++i)
    for (size_t j = i + 1; j < net.points.size(); ++j) {
      bool expect =
          s.geodesic_distance(net.points[i], net.points[j]) < Theta;
      CHECK(got.count({(int)i, (int)j}) == (expect ? 1u : 0u));
    }
  CHECK_THROWS_AS(close_pairs(s, manual_net(s, {a, b}, 0.2), 0.25),
                  PreconditionError);
}

TEST_CASE("singleton skeleton") {
  Surface s = refine(make_flat_torus(1, 1, 8), 1);
  Net net = manual_net(s, {s.canonical_vertex_point(0)}, 0.02);
  EmbeddedGraph g = build_skeleton(s, net, 0.08);
  CHECK(g.vertices.size() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("collinear geodesics merge into shared sub-edges") {
  Surface s = refine(make_flat_torus(1, 1, 4), 3);
  SurfacePoint p1 = torus_point(s, 0.25, 0.5);
  SurfacePoint p2 = torus_point(s, 0.3125, 0.5);
  SurfacePoint p3 = torus_point(s, 0.375, 0.5);
  Net net = manual_net(s, {p1, p2, p3}, 0.0624);
  EmbeddedGraph g = build_skeleton(s, net, 0.15);
  // pair (1,3) overlaps pairs (1,2) and (2,3): merged
  CHECK(g.vertices.size() == 3);
  CHECK(g.edges.size() == 2);
  for (const auto& e : g.edges)
    CHECK(e.length == doctest::Approx(0.0625).epsilon(1e-9));
  audit_interior_disjoint(s, g);
  // a torus minus an arc is not a cell decomposition: the audit rejects it
  CHECK_THROWS_AS(trace_faces(s, std::move(g)), BoundViolation);
}

TEST_CASE("four-cycle without boundary edges fails the chi audit") {
  Surface s = refine(make_flat_square(1, 1, 4), 1);
  // square cycle through four interior mesh vertices
  auto v = [&](double x, double y) {
    return s.canonical(torus_point(s, x, y));
  };
  std::vector<SurfacePoint> corners = {v(0.25, 0.25), v(0.75, 0.25),
                                       v(0.75, 0.75), v(0.25, 0.75)};
  std::vector<InputCurve> curves;
  for (int k = 0; k < 4; ++k) {
    GeodesicPath gp = s.geodesic_path(corners[k], corners[(k + 1) % 4]);
    curves.push_back({gp.points, EdgeOrigin::geodesic, gp.length});
  }
  EmbeddedGraph g = resolve_crossings(s, curves, corners);
  CHECK(g.vertices.size() == 4);
  CHECK(g.edges.size() == 4);
  CHECK_THROWS_AS(trace_faces(s, std::move(g)), BoundViolation);
}

TEST_CASE("torus skeleton: bounds, rotation, faces") {
  Surface s = refine(make_flat_torus(1, 1, 8), 2);
  double theta = 0.1, Theta = 0.24;
  Net net = build_net(s, theta, 23);
  EmbeddedGraph g = build_skeleton(s, net, Theta);

  // every geodesic edge is shorter than Theta (1 + delta)
  for (const auto& e : g.edges) {
    CHECK(e.origin == EdgeOrigin::geodesic);
    CHECK(e.length <= Theta * (1 + s.delta()) + 1e-12);
    CHECK(e.length > 0);
  }
  audit_interior_disjoint(s, g);

  // vertex proximity: every vertex within Theta/2 + slack of the net
  {
    std::vector<double> best(g.vertices.size(), 1e100);
    for (size_t i = 0; i < net.points.size(); ++i) {
      auto d = g.sssp((int)i);
      for (size_t v = 0; v < g.vertices.size(); ++v)
        best[v] = std::min(best[v], d[v]);
    }
    for (size_t v = 0; v < g.vertices.size(); ++v)
      CHECK(best[v] <= Theta / 2 + s.delta() * Theta + 1e-9);
  }

  // graph distances match the independent oracle exactly
  {
    Rng rng(5);
    for (int k = 0; k < 50; ++k) {
      int u = (int)rng.next_below(g.vertices.size());
      auto d = oracle_graph_sssp(g, u);
      int v = (int)rng.next_below(g.vertices.size());
      if (d[v] >= 1e100) continue;
      CHECK(g.distance(u, v) == d[v]);
    }
  }

  // coarse-embedding and affine bounds for net-point pairs
  {
    double th = net.theta_request;
    for (size_t i = 0; i < net.points.size(); i += 3) {
      auto dg = g.sssp((int)i);
      for (size_t j = i + 1; j < net.points.size(); j += 5) {
        double ds = s.geodesic_distance(net.points[i], net.points[j]);
        double dgv = dg[j];
        CHECK(ds <= dgv + s.delta() * Theta + 1e-9);  // 1-Lipschitz
        CHECK((1 - 2 * th / Theta) * dgv - Theta + 2 * th <=
              ds + 3 * s.delta() * Theta + 1e-9);
        CHECK(dgv <=
              Theta / (Theta - 2 * th) * ds + Theta + 3 * s.delta() * Theta + 1e-9);
      }
    }
  }

  // faces: chi matches the torus, and every dart lies in exactly one walk
  CellDecomposition dec = trace_faces(s, std::move(g));
  CHECK(dec.chi == 0);
  size_t total_darts = 0;
  for (auto& f : dec.faces) total_darts += f.size();
  // interior faces account for all darts (no boundary on the torus)
  CHECK(total_darts == 2 * dec.graph.edges.size());
  // face walks are closed: consecutive darts chain head-to-tail
  for (auto& f : dec.faces)
    for (size_t i = 0; i < f.size(); ++i)
      CHECK(dec.graph.head(f[i]) == dec.graph.tail(f[(i + 1) % f.size()]));
}

TEST_CASE("square skeleton with boundary") {
  Surface s = refine(make_flat_square(1, 1, 6), 2);
  double theta = 0.15, Theta = 0.4;
  Net net = build_net(s, theta, 31);
  EmbeddedGraph g = build_skeleton(s, net, Theta);

  // boundary edges present and no non-net vertex on the boundary
  int boundary_edges = 0;
  for (auto& e : g.edges)
    if (e.origin == EdgeOrigin::boundary) ++boundary_edges;
  CHECK(boundary_edges >= 4);
  for (auto& v : g.vertices)
    if (v.on_surface_boundary) CHECK(v.origin == VertexOrigin::net);

  CellDecomposition dec = trace_faces(s, std::move(g));
  CHECK(dec.chi == 1);
  for (auto& f : dec.faces) CHECK(f.size() >= 1);
}
