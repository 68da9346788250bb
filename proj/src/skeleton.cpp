#include "trigonal/skeleton.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>
#include <cstdio>
#include <cstdlib>

namespace trigonal {

// ===========================================================================
// EmbeddedGraph basics

std::vector<double> EmbeddedGraph::sssp(int src, std::vector<int>* parent) const {
  std::vector<std::vector<std::pair<int, double>>> adj(vertices.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].a == edges[e].b) continue;  // loops never shorten paths
    adj[edges[e].a].push_back({edges[e].b, edges[e].length});
    adj[edges[e].b].push_back({edges[e].a, edges[e].length});
  }
  std::vector<double> dist(vertices.size(), 1e100);
  if (parent) parent->assign(vertices.size(), -1);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [w, l] : adj[u])
      if (d + l < dist[w]) {
        dist[w] = d + l;
        if (parent) (*parent)[w] = u;
        pq.push({dist[w], w});
      }
  }
  return dist;
}

double EmbeddedGraph::distance(int u, int v) const {
  auto d = sssp(u);
  if (d[v] >= 1e100) throw PreconditionError("graph is disconnected");
  return d[v];
}

bool EmbeddedGraph::connected() const {
  if (vertices.empty()) return true;
  auto d = sssp(0);
  for (double x : d)
    if (x >= 1e100) return false;
  return true;
}

// ===========================================================================
// close pairs

std::vector<std::pair<int, int>> close_pairs(const Surface& s, const Net& net,
                                             double big_theta) {
  if (!(net.theta_request < big_theta / 2))
    throw PreconditionError("parameter violation: theta >= Theta/2");
  std::vector<int> net_of_node(s.node_count(), -1);
  for (size_t i = 0; i < net.nodes.size(); ++i) net_of_node[net.nodes[i]] = (int)i;

  std::vector<std::pair<int, int>> out;
  NodeDijkstra dj(s);
  NodeDijkstra::Options opt;
  opt.radius_cap = big_theta * 1.06;
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    dj.run_nodes({net.nodes[i]}, opt);
    for (int n : dj.touched()) {
      int j = net_of_node[n];
      if (j < 0 || j <= (int)i || !dj.reached(n)) continue;
      double dg = dj.dist(n);
      if (dg >= big_theta * 1.06) continue;
      double dd;
      if (dg < big_theta / (1 + 0.05)) {
        dd = dg;  // graph distance already certifies < Theta
        // still need the exact value? only the predicate matters here
        out.push_back({(int)i, j});
        continue;
      }
      std::vector<int> nodes = dj.path_nodes(n);
      if (!nodes.empty()) nodes.erase(nodes.begin());
      if (!nodes.empty()) nodes.pop_back();
      GeodesicPath gp = s.straighten_node_path(s.node_point(net.nodes[i]),
                                               s.node_point(n), nodes, nullptr);
      dd = gp.length;
      if (dd < big_theta) out.push_back({(int)i, j});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ===========================================================================
// crossing resolution

namespace {

// Unfold triangle t1 across shared edge e, given t0's corner chart; returns
// t1's corner positions in the same chart.
std::array<Vec2, 3> unfold_across(const Surface& s, int t0,
                                  const std::array<Vec2, 3>& cur, int eid,
                                  int t1) {
  int sd = -1, sdn = -1;
  for (int k = 0; k < 3; ++k) {
    if (s.tri_edge(t0, k) == eid) sd = k;
    if (s.tri_edge(t1, k) == eid) sdn = k;
  }
  if (sd < 0 || sdn < 0) throw std::logic_error("unfold: edge not shared");
  int va = s.tri(t1).v[sdn], vl = s.tri(t0).v[(sd + 1) % 3];
  Vec2 pl = cur[(sd + 1) % 3], pr = cur[sd];
  Vec2 P = (va == vl) ? pl : pr;
  Vec2 Q = (va == vl) ? pr : pl;
  double dlen = dist(P, Q);
  double a = s.tri(t1).len[(sdn + 2) % 3];
  double b = s.tri(t1).len[(sdn + 1) % 3];
  double x = (dlen * dlen + a * a - b * b) / (2 * dlen);
  double h2 = a * a - x * x;
  double h = h2 > 0 ? std::sqrt(h2) : 0;
  Vec2 dir = (Q - P) * (1.0 / dlen);
  Vec2 nrm{-dir.y, dir.x};
  Vec2 third_prev = cur[(sd + 2) % 3];
  double side_prev = (third_prev - P).cross(Q - P);
  Vec2 third = P + dir * x + nrm * ((side_prev < 0) ? -h : h);
  std::array<Vec2, 3> nxt;
  nxt[sdn] = P;
  nxt[(sdn + 1) % 3] = Q;
  nxt[(sdn + 2) % 3] = third;
  return nxt;
}

int common_tri(const Surface& s, const SurfacePoint& a, const SurfacePoint& b) {
  auto ta = s.incident_tris(a);
  auto tb = s.incident_tris(b);
  int best = -1;
  for (int x : ta)
    for (int y : tb)
      if (x == y && (best < 0 || x < best)) best = x;
  return best;
}

struct Event {
  int seg;
  double t;
  SurfacePoint pt;
};

}  // namespace

EmbeddedGraph resolve_crossings(const Surface& s,
                                const std::vector<InputCurve>& curves,
                                const std::vector<SurfacePoint>& net_points) {
  EmbeddedGraph g;
  std::unordered_map<PointKey, int, PointKeyHash> vid;

  auto vertex_on_boundary = [&](const PointKey& k) {
    if (k.kind == 0) return s.fan(k.i0).boundary;
    if (k.kind == 1) return s.edge(k.i0).boundary();
    return false;
  };
  auto register_point = [&](const SurfacePoint& p, VertexOrigin origin) {
    SurfacePoint c = s.canonical(p);
    PointKey k = s.key(c);
    auto it = vid.find(k);
    if (it != vid.end()) return it->second;
    GVertex v;
    v.p = c;
    v.origin = origin;
    v.on_surface_boundary = vertex_on_boundary(k);
    g.vertices.push_back(v);
    vid[k] = (int)g.vertices.size() - 1;
    return (int)g.vertices.size() - 1;
  };

  for (const SurfacePoint& p : net_points)
    register_point(p, VertexOrigin::net);

  // segment soup bucketed by triangle
  std::vector<std::vector<std::pair<int, int>>> bucket(s.triangle_count());
  for (size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      // all triangles containing the segment (two when it runs along an
      // interior mesh edge)
      auto ta = s.incident_tris(pts[i]);
      auto tb = s.incident_tris(pts[i + 1]);
      int found = 0;
      for (int x : ta)
        for (int y : tb)
          if (x == y) {
            bucket[x].push_back({(int)c, (int)i});
            ++found;
          }
      if (!found)
        throw std::logic_error("curve segment without a containing triangle");
    }
  }

  std::vector<std::vector<Event>> events(curves.size());
  auto seg_pos = [&](int c, int i, int t) {
    return std::make_pair(s.point_in_layout(curves[c].points[i], t),
                          s.point_in_layout(curves[c].points[i + 1], t));
  };

  // net points sitting on segment interiors
  for (size_t np = 0; np < net_points.size(); ++np) {
    SurfacePoint cp = s.canonical(net_points[np]);
    PointKey ck = s.key(cp);
    for (int t : s.incident_tris(cp)) {
      Vec2 P = s.point_in_layout(cp, t);
      for (auto [c, i] : bucket[t]) {
        auto [A, B] = seg_pos(c, i, t);
        double lab = dist(A, B);
        if (lab < 1e-14) continue;
        double cr = orient2d(A, B, P);
        if (std::abs(cr) > 1e-9 * lab) continue;
        double u = (P - A).dot(B - A) / (lab * lab);
        if (u < 1e-9 || u > 1 - 1e-9) continue;
        PointKey ka = s.key(curves[c].points[i]);
        PointKey kb = s.key(curves[c].points[i + 1]);
        if (ka == ck || kb == ck) continue;
        events[c].push_back({i, u, cp});
      }
    }
  }

  // pairwise segment intersections within each triangle
  for (int t = 0; t < s.triangle_count(); ++t) {
    const auto& segs = bucket[t];
    for (size_t x = 0; x < segs.size(); ++x) {
      for (size_t y = x + 1; y < segs.size(); ++y) {
        auto [c1, i1] = segs[x];
        auto [c2, i2] = segs[y];
        if (c1 == c2) continue;  // geodesic curves are simple
        auto [A0, A1] = seg_pos(c1, i1, t);
        auto [B0, B1] = seg_pos(c2, i2, t);
        double la = dist(A0, A1), lb = dist(B0, B1);
        if (la < 1e-14 || lb < 1e-14) continue;
        double eps_area = 1e-10 * la * lb;
        double d1 = orient2d(B0, B1, A0);
        double d2 = orient2d(B0, B1, A1);
        double d3 = orient2d(A0, A1, B0);
        double d4 = orient2d(A0, A1, B1);
        if (std::abs(d1) <= eps_area && std::abs(d2) <= eps_area) {
          // collinear: split each segment at the other's interior endpoints
          Vec2 dA = (A1 - A0) * (1 / la);
          auto along = [&](Vec2 P) { return (P - A0).dot(dA) / la; };
          double u0 = along(B0), u1 = along(B1);
          double lo = std::min(u0, u1), hi = std::max(u0, u1);
          if (hi < 1e-9 || lo > 1 - 1e-9) continue;  // disjoint
          auto add_on = [&](int c, int i, double u, const SurfacePoint& pt) {
            if (u > 1e-9 && u < 1 - 1e-9) events[c].push_back({i, u, pt});
          };
          add_on(c1, i1, u0, curves[c2].points[i2]);
          add_on(c1, i1, u1, curves[c2].points[i2 + 1]);
          // B params of A's endpoints
          Vec2 dB = (B1 - B0) * (1 / lb);
          auto alongB = [&](Vec2 P) { return (P - B0).dot(dB) / lb; };
          add_on(c2, i2, alongB(A0), curves[c1].points[i1]);
          add_on(c2, i2, alongB(A1), curves[c1].points[i1 + 1]);
          continue;
        }
        if ((d1 > eps_area && d2 > eps_area) || (d1 < -eps_area && d2 < -eps_area))
          continue;
        if ((d3 > eps_area && d4 > eps_area) || (d3 < -eps_area && d4 < -eps_area))
          continue;
        double denomA = d1 - d2;
        double denomB = d3 - d4;
        if (denomA == 0 || denomB == 0) continue;
        double tA = d1 / denomA;  // param along A (A endpoints vs line B)
        double tB = d3 / denomB;  // param along B
        if (tA < -1e-9 || tA > 1 + 1e-9 || tB < -1e-9 || tB > 1 + 1e-9)
          continue;
        bool a_interior = tA > 1e-9 && tA < 1 - 1e-9;
        bool b_interior = tB > 1e-9 && tB < 1 - 1e-9;
        if (!a_interior && !b_interior) continue;  // endpoint touch
        SurfacePoint pt;
        if (!a_interior) {
          pt = curves[c1].points[tA <= 0.5 ? i1 : i1 + 1];
        } else if (!b_interior) {
          pt = curves[c2].points[tB <= 0.5 ? i2 : i2 + 1];
        } else {
          Vec2 P = A0 + (A1 - A0) * tA;
          auto L = s.layout(t);
          double area = orient2d(L[0], L[1], L[2]);
          pt.tri = t;
          pt.bary[0] = orient2d(P, L[1], L[2]) / area;
          pt.bary[1] = orient2d(L[0], P, L[2]) / area;
          pt.bary[2] = 1 - pt.bary[0] - pt.bary[1];
          for (auto& bv : pt.bary) bv = std::clamp(bv, 0.0, 1.0);
          double sum = pt.bary[0] + pt.bary[1] + pt.bary[2];
          for (auto& bv : pt.bary) bv /= sum;
          pt = s.canonical(pt);
        }
        if (a_interior) events[c1].push_back({i1, tA, pt});
        if (b_interior) events[c2].push_back({i2, tB, pt});
      }
    }
  }

  // split curves at events and emit deduplicated edges
  struct EdgeKey {
    int va, vb;
    PointKey mid;
    bool operator==(const EdgeKey&) const = default;
  };
  struct EdgeKeyHash {
    size_t operator()(const EdgeKey& k) const {
      size_t h = std::hash<int>()(k.va) * 31 + std::hash<int>()(k.vb);
      return h * 1315423911u + PointKeyHash()(k.mid);
    }
  };
  std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_ids;

  auto chart_len = [&](const SurfacePoint& a, const SurfacePoint& b) {
    int t = common_tri(s, a, b);
    return dist(s.point_in_layout(a, t), s.point_in_layout(b, t));
  };
  auto midpoint_key = [&](const std::vector<SurfacePoint>& pts) {
    double total = 0;
    std::vector<double> acc(pts.size(), 0);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      total += chart_len(pts[i], pts[i + 1]);
      acc[i + 1] = total;
    }
    double half = total / 2;
    size_t i = 0;
    while (i + 1 < acc.size() && acc[i + 1] < half) ++i;
    double seg = acc[i + 1] - acc[i];
    double u = seg > 1e-300 ? (half - acc[i]) / seg : 0.5;
    int t = common_tri(s, pts[i], pts[i + 1]);
    Vec2 P = s.point_in_layout(pts[i], t) * (1 - u) +
             s.point_in_layout(pts[i + 1], t) * u;
    auto L = s.layout(t);
    double area = orient2d(L[0], L[1], L[2]);
    SurfacePoint mp;
    mp.tri = t;
    mp.bary[0] = orient2d(P, L[1], L[2]) / area;
    mp.bary[1] = orient2d(L[0], P, L[2]) / area;
    mp.bary[2] = 1 - mp.bary[0] - mp.bary[1];
    return s.key(mp);
  };

  auto emit_edge = [&](std::vector<SurfacePoint> pts, EdgeOrigin origin) {
    // strip repeated points
    std::vector<SurfacePoint> clean;
    for (auto& p : pts) {
      SurfacePoint c = s.canonical(p);
      if (!clean.empty() && s.key(clean.back()) == s.key(c)) continue;
      clean.push_back(c);
    }
    if (clean.size() < 2) return;
    double len = 0;
    for (size_t i = 0; i + 1 < clean.size(); ++i)
      len += chart_len(clean[i], clean[i + 1]);
    if (len < 1e-13) return;
    int va = register_point(clean.front(), VertexOrigin::crossing);
    int vb = register_point(clean.back(), VertexOrigin::crossing);
    EdgeKey key;
    key.va = std::min(va, vb);
    key.vb = std::max(va, vb);
    key.mid = midpoint_key(clean);
    auto it = edge_ids.find(key);
    if (it != edge_ids.end()) {
      if (std::abs(g.edges[it->second].length - len) > 1e-7 * std::max(1.0, len))
        throw BoundViolation(
            "non-manifold crossing cluster: coincident edges of different "
            "lengths");
      // merged duplicate (collinear overlap); boundary provenance wins
      if (origin == EdgeOrigin::boundary)
        g.edges[it->second].origin = EdgeOrigin::boundary;
      return;
    }
    GEdge e;
    if (va <= vb) {
      e.a = va;
      e.b = vb;
      e.polyline = std::move(clean);
    } else {
      e.a = vb;
      e.b = va;
      std::reverse(clean.begin(), clean.end());
      e.polyline = std::move(clean);
    }
    e.origin = origin;
    e.length = len;
    edge_ids[key] = (int)g.edges.size();
    g.edges.push_back(std::move(e));
  };

  for (size_t c = 0; c < curves.size(); ++c) {
    auto& evs = events[c];
    std::sort(evs.begin(), evs.end(), [](const Event& a, const Event& b) {
      return a.seg < b.seg || (a.seg == b.seg && a.t < b.t);
    });
    evs.erase(std::unique(evs.begin(), evs.end(),
                          [&](const Event& a, const Event& b) {
                            return a.seg == b.seg &&
                                   s.key(a.pt) == s.key(b.pt);
                          }),
              evs.end());
    const auto& pts = curves[c].points;
    std::vector<SurfacePoint> cur;
    cur.push_back(pts[0]);
    size_t ei = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      while (ei < evs.size() && evs[ei].seg == (int)i) {
        cur.push_back(evs[ei].pt);
        emit_edge(cur, curves[c].origin);
        cur.clear();
        cur.push_back(evs[ei].pt);
        ++ei;
      }
      cur.push_back(pts[i + 1]);
    }
    emit_edge(cur, curves[c].origin);
  }

  // Dissolve degree-2 crossing vertices: they are collinear-overlap
  // junction artifacts, not true crossings (true transversal crossings have
  // degree four, divergence points degree three).
  {
    std::vector<std::vector<std::pair<int, int>>> ends(g.vertices.size());
    for (size_t e = 0; e < g.edges.size(); ++e) {
      ends[g.edges[e].a].push_back({(int)e, 0});
      ends[g.edges[e].b].push_back({(int)e, 1});
    }
    std::vector<char> dead_v(g.vertices.size(), 0), dead_e(g.edges.size(), 0);
    for (size_t v = 0; v < g.vertices.size(); ++v) {
      if (g.vertices[v].origin != VertexOrigin::crossing) continue;
      // recompute live ends
      std::vector<std::pair<int, int>> live;
      for (auto [e, side] : ends[v])
        if (!dead_e[e]) live.push_back({e, side});
      if (live.size() != 2) continue;
      auto [e1, s1] = live[0];
      auto [e2, s2] = live[1];
      if (e1 == e2) continue;  // loop at v stays
      GEdge& a = g.edges[e1];
      GEdge& b = g.edges[e2];
      // orient a to end at v and b to start at v
      std::vector<SurfacePoint> pts;
      if (s1 == 0) {  // a starts at v: reverse
        pts.assign(a.polyline.rbegin(), a.polyline.rend());
      } else {
        pts = a.polyline;
      }
      std::vector<SurfacePoint> tail;
      if (s2 == 0) {
        tail = b.polyline;
      } else {
        tail.assign(b.polyline.rbegin(), b.polyline.rend());
      }
      pts.insert(pts.end(), tail.begin() + 1, tail.end());
      int va = (s1 == 0) ? a.b : a.a;
      int vb = (s2 == 0) ? b.b : b.a;
      GEdge merged;
      merged.origin = (a.origin == EdgeOrigin::boundary ||
                       b.origin == EdgeOrigin::boundary)
                          ? EdgeOrigin::boundary
                          : a.origin;
      merged.length = a.length + b.length;
      if (va <= vb) {
        merged.a = va;
        merged.b = vb;
        merged.polyline = std::move(pts);
      } else {
        merged.a = vb;
        merged.b = va;
        std::reverse(pts.begin(), pts.end());
        merged.polyline = std::move(pts);
      }
      dead_e[e2] = 1;
      dead_v[v] = 1;
      g.edges[e1] = std::move(merged);
      // rewire endpoint bookkeeping for further dissolves
      for (auto& pr : ends[va])
        if (pr.first == e2) pr.first = e1;
      for (auto& pr : ends[vb])
        if (pr.first == e2) pr.first = e1;
      ends[va].push_back({e1, g.edges[e1].a == va ? 0 : 1});
      ends[vb].push_back({e1, g.edges[e1].a == vb ? 0 : 1});
    }
    // compact
    std::vector<int> vmap(g.vertices.size(), -1);
    std::vector<GVertex> nv;
    for (size_t v = 0; v < g.vertices.size(); ++v)
      if (!dead_v[v]) {
        vmap[v] = (int)nv.size();
        nv.push_back(g.vertices[v]);
      }
    std::vector<GEdge> ne;
    for (size_t e = 0; e < g.edges.size(); ++e) {
      if (dead_e[e]) continue;
      GEdge ge = std::move(g.edges[e]);
      ge.a = vmap[ge.a];
      ge.b = vmap[ge.b];
      if (ge.a < 0 || ge.b < 0)
        throw std::logic_error("dissolve pass removed a live endpoint");
      ne.push_back(std::move(ge));
    }
    g.vertices = std::move(nv);
    g.edges = std::move(ne);
  }

  // no vertex may appear on the surface boundary beyond the net's own points
  for (const auto& v : g.vertices)
    if (v.on_surface_boundary && v.origin == VertexOrigin::crossing) {
      if (getenv("TRIG_DBG")) {
        fprintf(stderr, "boundary crossing vertex: tri=%d bary=(%g,%g,%g)\n",
                v.p.tri, v.p.bary[0], v.p.bary[1], v.p.bary[2]);
        int deg = 0;
        for (auto& e : g.edges) {
          PointKey k;
          (void)k;
          if (s.key(g.vertices[e.a].p) == s.key(v.p) ||
              s.key(g.vertices[e.b].p) == s.key(v.p))
            ++deg;
        }
        fprintf(stderr, "  degree=%d\n", deg);
      }
      throw BoundViolation(
          "crossing resolution placed a vertex on the surface boundary");
    }

  // rotation system
  g.rotation.assign(g.vertices.size(), {});
  struct DartAngle {
    double ang;
    Dart d;
  };
  std::vector<std::vector<DartAngle>> rot(g.vertices.size());
  const double TWO_PI = 2 * std::acos(-1.0);

  auto dart_direction_angle = [&](int v, Dart d) -> double {
    const GEdge& e = g.edges[d.edge];
    const SurfacePoint& P = g.vertices[v].p;
    SurfacePoint Q = d.dir == 0 ? e.polyline[1] : e.polyline[e.polyline.size() - 2];
    PointKey pk = s.key(P);
    if (pk.kind == 0) {
      // mesh vertex: fan chart
      int m = pk.i0;
      const VertexFan& fan = s.fan(m);
      int t = common_tri(s, P, Q);
      int fi = -1, corner = -1;
      for (size_t i = 0; i < fan.entries.size(); ++i)
        if (fan.entries[i].tri == t) {
          fi = (int)i;
          corner = fan.entries[i].corner;
        }
      if (fi < 0) throw std::logic_error("rotation: triangle not in fan");
      auto L = s.layout(t);
      Vec2 origin = L[corner];
      Vec2 spoke = L[(corner + 1) % 3] - origin;
      Vec2 dir = s.point_in_layout(Q, t) - origin;
      double local = std::atan2(spoke.cross(dir), spoke.dot(dir));
      if (local < 0) local = 0;
      double ca = s.corner_angle(t, corner);
      if (local > ca) local = ca;
      return fan.entries[fi].angle_off + local;
    }
    if (pk.kind == 1) {
      const MeshEdge& me = s.edge(pk.i0);
      int t0 = me.tri[1] >= 0 ? std::min(me.tri[0], me.tri[1]) : me.tri[0];
      auto L0 = s.layout(t0);
      int sd = (t0 == me.tri[0]) ? me.side[0] : me.side[1];
      Vec2 pa = (s.tri(t0).v[sd] == me.a) ? L0[sd] : L0[(sd + 1) % 3];
      Vec2 pb = (s.tri(t0).v[sd] == me.a) ? L0[(sd + 1) % 3] : L0[sd];
      Vec2 axis = (pb - pa) * (1.0 / me.len);
      Vec2 P0 = s.point_in_layout(P, t0);
      int tq = common_tri(s, P, Q);
      Vec2 Qp;
      if (tq == t0) {
        Qp = s.point_in_layout(Q, t0);
      } else {
        auto cur = unfold_across(s, t0, L0, pk.i0, tq);
        SurfacePoint qb = s.rebase(Q, tq);
        Qp = cur[0] * qb.bary[0] + cur[1] * qb.bary[1] + cur[2] * qb.bary[2];
      }
      Vec2 dir = Qp - P0;
      double ang = std::atan2(axis.cross(dir), axis.dot(dir));
      if (ang < 0) ang += TWO_PI;
      return ang;
    }
    // interior crossing point: plain chart angle
    int t = pk.i0;
    Vec2 P0 = s.point_in_layout(P, t);
    Vec2 Qp = s.point_in_layout(Q, t);
    Vec2 dir = Qp - P0;
    double ang = std::atan2(dir.y, dir.x);
    if (ang < 0) ang += TWO_PI;
    return ang;
  };

  for (size_t e = 0; e < g.edges.size(); ++e) {
    rot[g.edges[e].a].push_back(
        {dart_direction_angle(g.edges[e].a, {(int)e, 0}), {(int)e, 0}});
    rot[g.edges[e].b].push_back(
        {dart_direction_angle(g.edges[e].b, {(int)e, 1}), {(int)e, 1}});
  }
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    std::sort(rot[v].begin(), rot[v].end(),
              [](const DartAngle& a, const DartAngle& b) {
                if (a.ang != b.ang) return a.ang < b.ang;
                if (a.d.edge != b.d.edge) return a.d.edge < b.d.edge;
                return a.d.dir < b.d.dir;
              });
    for (auto& da : rot[v]) g.rotation[v].push_back(da.d);
  }
  return g;
}

// ===========================================================================
// skeleton assembly

EmbeddedGraph build_skeleton(const Surface& s, const Net& net,
                             double big_theta) {
  if (net.points.empty()) throw PreconditionError("empty net");
  auto sys = s.systole_lower_bound();
  if (sys && !(big_theta < *sys / 4))
    throw PreconditionError(
        "tame-regime precondition violated: Theta = " +
        std::to_string(big_theta) + " but the measured systole lower bound is " +
        std::to_string(*sys) + " (need Theta < systole/4)");

  auto pairs = close_pairs(s, net, big_theta);

  std::vector<InputCurve> curves(pairs.size());
  parallel_for(pairs.size(), [&](size_t k) {
    auto [i, j] = pairs[k];
    GeodesicPath gp = s.geodesic_path(net.points[i], net.points[j]);
    curves[k].points = std::move(gp.points);
    curves[k].origin = EdgeOrigin::geodesic;
    curves[k].length = gp.length;
  });

  // boundary loops as curves split at the net's boundary points
  int K = s.steiner_per_edge();
  for (size_t li = 0; li < s.boundary_loops().size(); ++li) {
    const auto& loop = s.boundary_loops()[li];
    // ordered nodes along the loop
    std::vector<int> nodes;
    int v = -1;
    {
      const MeshEdge& e0 = s.edge(loop[0]);
      if (loop.size() == 1) {
        v = e0.a;
      } else {
        const MeshEdge& e1 = s.edge(loop[1]);
        v = (e0.a == e1.a || e0.a == e1.b) ? e0.b : e0.a;
      }
    }
    for (int eid : loop) {
      const MeshEdge& e = s.edge(eid);
      bool fwd = (e.a == v);
      nodes.push_back(v);
      for (int j = 1; j <= K; ++j)
        nodes.push_back(s.vertex_count() + eid * K + (fwd ? j : K + 1 - j) - 1);
      v = fwd ? e.b : e.a;
    }
    // positions of the net chain points along this loop
    const auto& chain =
        li < net.boundary_chains.size() ? net.boundary_chains[li] : std::vector<int>{};
    if (chain.empty())
      throw PreconditionError("net has no boundary chain for a boundary loop");
    std::vector<size_t> marks;
    for (int pi : chain) {
      int node = net.nodes[pi];
      auto it = std::find(nodes.begin(), nodes.end(), node);
      if (it == nodes.end())
        throw std::logic_error("boundary net point is not on its loop");
      marks.push_back(it - nodes.begin());
    }
    std::sort(marks.begin(), marks.end());
    for (size_t m = 0; m < marks.size(); ++m) {
      size_t from = marks[m];
      size_t to = marks[(m + 1) % marks.size()];
      InputCurve cur;
      cur.origin = EdgeOrigin::boundary;
      size_t idx = from;
      cur.points.push_back(s.node_point(nodes[idx]));
      do {
        idx = (idx + 1) % nodes.size();
        cur.points.push_back(s.node_point(nodes[idx]));
      } while (idx != to);
      curves.push_back(std::move(cur));
    }
  }

  return resolve_crossings(s, curves, net.points);
}

// ===========================================================================
// face tracing

CellDecomposition trace_faces(const Surface& s, EmbeddedGraph g) {
  size_t E = g.edges.size();
  // dart -> (vertex, position in rotation)
  std::vector<std::pair<int, int>> where(2 * E, {-1, -1});
  for (size_t v = 0; v < g.vertices.size(); ++v)
    for (size_t i = 0; i < g.rotation[v].size(); ++i)
      where[dart_id(g.rotation[v][i])] = {(int)v, (int)i};
  for (size_t d = 0; d < 2 * E; ++d)
    if (where[d].first < 0)
      throw std::logic_error("rotation system is missing a dart");

  // next dart in the face walk; phantom transitions cross the closing wedge
  // at boundary vertices
  std::vector<int> next(2 * E, -1);
  std::vector<char> phantom_step(2 * E, 0);
  for (size_t e = 0; e < E; ++e) {
    for (int dir = 0; dir < 2; ++dir) {
      Dart d{(int)e, dir};
      int v = g.head(d);
      Dart r = reversed(d);
      auto [rv, pos] = where[dart_id(r)];
      if (rv != v) throw std::logic_error("dart bookkeeping mismatch");
      int n = (int)g.rotation[v].size();
      int prev = (pos - 1 + n) % n;
      next[dart_id(d)] = dart_id(g.rotation[v][prev]);
      if (g.vertices[v].on_surface_boundary && pos == 0)
        phantom_step[dart_id(d)] = 1;
    }
  }

  std::vector<int> face_of(2 * E, -1);
  std::vector<std::vector<Dart>> walks;
  std::vector<char> walk_phantom;
  for (size_t d0 = 0; d0 < 2 * E; ++d0) {
    if (face_of[d0] >= 0) continue;
    std::vector<Dart> walk;
    bool ph = false;
    int d = (int)d0;
    do {
      face_of[d] = (int)walks.size();
      walk.push_back(dart_of(d));
      if (phantom_step[d]) ph = true;
      d = next[d];
    } while (d != (int)d0);
    walks.push_back(std::move(walk));
    walk_phantom.push_back(ph);
  }

  CellDecomposition out;
  int phantoms = 0;
  for (size_t w = 0; w < walks.size(); ++w) {
    if (walk_phantom[w])
      ++phantoms;
    else
      out.faces.push_back(std::move(walks[w]));
  }
  if (phantoms != (int)s.boundary_loops().size())
    throw BoundViolation(
        "cell decomposition rejected: expected " +
        std::to_string(s.boundary_loops().size()) + " boundary walks, traced " +
        std::to_string(phantoms));
  out.chi = (int)g.vertices.size() - (int)E + (int)out.faces.size();
  if (out.chi != s.euler_characteristic())
    throw BoundViolation(
        "cell decomposition rejected: Euler characteristic " +
        std::to_string(out.chi) + " does not match the surface (" +
        std::to_string(s.euler_characteristic()) + ")");
  out.graph = std::move(g);
  return out;
}

}  // namespace trigonal
