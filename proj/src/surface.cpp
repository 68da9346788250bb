#include "trigonal/surface.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

namespace trigonal {

namespace {
constexpr double kClassifyTol = 1e-10;  // barycentric zero threshold
}

Surface::Surface(int vertex_count, std::vector<Triangle> tris,
                 std::optional<std::vector<Vec3>> positions, int steiner_level,
                 bool run_calibration)
    : vertex_count_(vertex_count),
      tris_(std::move(tris)),
      positions_(std::move(positions)),
      steiner_level_(steiner_level) {
  if (vertex_count_ <= 0 || tris_.empty())
    throw FormatError("surface needs at least one triangle");
  if (positions_ && (int)positions_->size() != vertex_count_)
    throw FormatError("position count does not match vertex count");
  for (size_t i = 0; i < tris_.size(); ++i) {
    const Triangle& t = tris_[i];
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] < 0 || t.v[k] >= vertex_count_)
        throw FormatError("triangle " + std::to_string(i) +
                          " references an invalid vertex");
      if (!(t.len[k] > 0))
        throw FormatError("triangle " + std::to_string(i) +
                          " has a non-positive edge length");
    }
    if (t.v[0] == t.v[1] || t.v[1] == t.v[2] || t.v[2] == t.v[0])
      throw FormatError("triangle " + std::to_string(i) +
                        " has repeated vertices");
    for (int k = 0; k < 3; ++k) {
      double a = t.len[k], b = t.len[(k + 1) % 3], c = t.len[(k + 2) % 3];
      if (!(a + b - c > 1e-12 * (a + b + c)))
        throw FormatError("triangle " + std::to_string(i) +
                          " violates the strict triangle inequality");
    }
  }
  orient_consistently();
  build_edges();
  build_boundary_loops();

  corner_angles_.resize(tris_.size());
  for (size_t t = 0; t < tris_.size(); ++t) {
    const auto& l = tris_[t].len;
    for (int c = 0; c < 3; ++c) {
      // angle at corner c, between sides of length l[c] and l[(c+2)%3]
      double p = l[c], q = l[(c + 2) % 3], o = l[(c + 1) % 3];
      double cosv = (p * p + q * q - o * o) / (2 * p * q);
      corner_angles_[t][c] = std::acos(std::clamp(cosv, -1.0, 1.0));
    }
  }

  build_fans();
  build_node_graph();
  if (run_calibration) calibrate();
}

int Surface::neighbor(int t, int side) const {
  const MeshEdge& e = edges_[tri_edges_[t][side]];
  return e.tri[0] == t ? e.tri[1] : e.tri[0];
}

void Surface::orient_consistently() {
  // BFS over triangle adjacency, flipping so shared edges are traversed in
  // opposite directions by their two triangles.
  std::map<std::pair<int, int>, std::vector<int>> by_edge;
  for (size_t t = 0; t < tris_.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      by_edge[{std::min(a, b), std::max(a, b)}].push_back((int)t);
    }
  for (auto& [key, ts] : by_edge)
    if (ts.size() > 2)
      throw FormatError("non-manifold edge (" + std::to_string(key.first) +
                        "," + std::to_string(key.second) + ")");

  std::vector<int> state(tris_.size(), 0);  // 0 unvisited, 1 visited
  std::vector<int> stack;
  size_t visited = 0;
  stack.push_back(0);
  state[0] = 1;
  ++visited;
  auto dir_of = [&](int t, int a, int b) {
    // +1 if edge appears as a->b in t's cycle, -1 if b->a
    for (int k = 0; k < 3; ++k) {
      if (tris_[t].v[k] == a && tris_[t].v[(k + 1) % 3] == b) return +1;
      if (tris_[t].v[k] == b && tris_[t].v[(k + 1) % 3] == a) return -1;
    }
    return 0;
  };
  auto flip = [&](int t) {
    Triangle& tr = tris_[t];
    std::swap(tr.v[1], tr.v[2]);
    std::swap(tr.len[0], tr.len[2]);
  };
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    for (int k = 0; k < 3; ++k) {
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      auto& ts = by_edge[{std::min(a, b), std::max(a, b)}];
      for (int u : ts) {
        if (u == t) continue;
        int need = -dir_of(t, a, b);
        if (state[u] == 0) {
          if (dir_of(u, a, b) != need) flip(u);
          state[u] = 1;
          ++visited;
          stack.push_back(u);
        } else if (dir_of(u, a, b) != need) {
          throw FormatError("surface is non-orientable");
        }
      }
    }
  }
  if (visited != tris_.size()) throw FormatError("mesh is disconnected");
  // isolated vertices also count as disconnected
  std::vector<char> used(vertex_count_, 0);
  for (auto& t : tris_)
    for (int k = 0; k < 3; ++k) used[t.v[k]] = 1;
  for (int v = 0; v < vertex_count_; ++v)
    if (!used[v]) throw FormatError("mesh is disconnected (isolated vertex)");
}

void Surface::build_edges() {
  std::map<std::pair<int, int>, int> idx;
  tri_edges_.assign(tris_.size(), {-1, -1, -1});
  for (size_t t = 0; t < tris_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = tris_[t].v[k], b = tris_[t].v[(k + 1) % 3];
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = idx.find(key);
      if (it == idx.end()) {
        MeshEdge e;
        e.a = key.first;
        e.b = key.second;
        e.len = tris_[t].len[k];
        e.tri[0] = (int)t;
        e.side[0] = k;
        idx[key] = (int)edges_.size();
        tri_edges_[t][k] = (int)edges_.size();
        edges_.push_back(e);
      } else {
        MeshEdge& e = edges_[it->second];
        if (e.tri[1] >= 0)
          throw FormatError("non-manifold edge");  // guarded earlier too
        double l = tris_[t].len[k];
        if (std::abs(l - e.len) > 1e-9 * std::max(1.0, e.len))
          throw FormatError("shared edge has mismatched intrinsic lengths");
        e.tri[1] = (int)t;
        e.side[1] = k;
        tri_edges_[t][k] = it->second;
      }
    }
  }
}

void Surface::build_boundary_loops() {
  // Chain boundary edges: at each boundary vertex exactly two boundary edges
  // must meet (surface manifoldness).
  std::vector<std::vector<int>> at_vertex(vertex_count_);
  std::vector<int> bedges;
  for (size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].boundary()) {
      bedges.push_back((int)e);
      at_vertex[edges_[e].a].push_back((int)e);
      at_vertex[edges_[e].b].push_back((int)e);
    }
  }
  for (int v = 0; v < vertex_count_; ++v)
    if (!at_vertex[v].empty() && at_vertex[v].size() != 2)
      throw FormatError("non-manifold boundary vertex " + std::to_string(v));
  std::vector<char> seen(edges_.size(), 0);
  for (int e0 : bedges) {
    if (seen[e0]) continue;
    std::vector<int> loop;
    int e = e0, vprev = edges_[e0].a;
    do {
      seen[e] = 1;
      loop.push_back(e);
      int vnext = edges_[e].a == vprev ? edges_[e].b : edges_[e].a;
      int enext = at_vertex[vnext][0] == e ? at_vertex[vnext][1]
                                           : at_vertex[vnext][0];
      vprev = vnext;
      e = enext;
    } while (e != e0);
    boundary_loops_.push_back(std::move(loop));
  }
}

void Surface::build_fans() {
  fans_.assign(vertex_count_, {});
  // corner lookup
  std::vector<std::vector<std::pair<int, int>>> corners(vertex_count_);
  for (size_t t = 0; t < tris_.size(); ++t)
    for (int c = 0; c < 3; ++c)
      corners[tris_[t].v[c]].push_back({(int)t, c});

  for (int v = 0; v < vertex_count_; ++v) {
    auto& cs = corners[v];
    if (cs.empty()) continue;
    // start at a corner whose "first spoke" (side c) is a boundary edge, if
    // one exists; otherwise the corner in the lowest triangle id.
    int start = -1;
    for (size_t i = 0; i < cs.size(); ++i) {
      auto [t, c] = cs[i];
      if (edges_[tri_edges_[t][c]].boundary()) {
        start = (int)i;
        break;
      }
    }
    bool boundary = start >= 0;
    if (start < 0) {
      start = 0;
      for (size_t i = 1; i < cs.size(); ++i)
        if (cs[i].first < cs[start].first) start = (int)i;
    }
    VertexFan fan;
    fan.boundary = boundary;
    double acc = 0;
    auto [t, c] = cs[start];
    for (size_t steps = 0;; ++steps) {
      if (steps > cs.size())
        throw FormatError("non-manifold vertex " + std::to_string(v));
      fan.entries.push_back({t, c, acc});
      acc += corner_angles_[t][c];
      int spoke = tri_edges_[t][(c + 2) % 3];  // last spoke of this corner
      const MeshEdge& e = edges_[spoke];
      if (e.boundary()) break;  // linear fan ends
      int tn = e.tri[0] == t ? e.tri[1] : e.tri[0];
      int cn = e.tri[0] == tn ? e.side[0] : e.side[1];
      if (tn == fan.entries.front().tri && cn == fan.entries.front().corner)
        break;  // closed the cycle
      t = tn;
      c = cn;
    }
    if (fan.entries.size() != cs.size())
      throw FormatError("non-manifold vertex " + std::to_string(v));
    fan.total_angle = acc;
    fans_[v] = std::move(fan);
  }
}

std::array<Vec2, 3> Surface::layout(int t) const {
  const auto& l = tris_[t].len;
  double x = (l[0] * l[0] + l[2] * l[2] - l[1] * l[1]) / (2 * l[0]);
  double y2 = l[2] * l[2] - x * x;
  double y = y2 > 0 ? std::sqrt(y2) : 0;
  return {Vec2{0, 0}, Vec2{l[0], 0}, Vec2{x, y}};
}

double Surface::total_area() const {
  double area = 0;
  for (auto& t : tris_) {
    double a = t.len[0], b = t.len[1], c = t.len[2];
    double s = (a + b + c) / 2;
    area += std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
  }
  return area;
}

double Surface::max_edge_length() const {
  double m = 0;
  for (auto& e : edges_) m = std::max(m, e.len);
  return m;
}

// ---------------------------------------------------------------------------
// point classification and canonical forms

namespace {
// kind 0: vertex (corner index in `idx`); kind 1: edge (side index in `idx`,
// param along the side direction); kind 2: interior.
struct LocalClass {
  int kind;
  int idx;
  double param;
};

LocalClass classify_local(const std::array<double, 3>& b) {
  int zeros = 0;
  int zi = -1;
  for (int k = 0; k < 3; ++k)
    if (b[k] <= kClassifyTol) {
      ++zeros;
      zi = k;
    }
  if (zeros >= 2) {
    // vertex: the corner with the (single) large coordinate
    int big = 0;
    for (int k = 1; k < 3; ++k)
      if (b[k] > b[big]) big = k;
    return {0, big, 0};
  }
  if (zeros == 1) {
    // on side (zi+1)%3, param from v[(zi+1)%3] toward v[(zi+2)%3]
    int side = (zi + 1) % 3;
    double p = b[(zi + 2) % 3] / (b[(zi + 1) % 3] + b[(zi + 2) % 3]);
    return {1, side, p};
  }
  return {2, -1, 0};
}
}  // namespace

std::vector<int> Surface::incident_tris(const SurfacePoint& p) const {
  LocalClass lc = classify_local(p.bary);
  if (lc.kind == 2) return {p.tri};
  if (lc.kind == 1) {
    const MeshEdge& e = edges_[tri_edges_[p.tri][lc.idx]];
    if (e.boundary()) return {e.tri[0]};
    return {e.tri[0], e.tri[1]};
  }
  int v = tris_[p.tri].v[lc.idx];
  std::vector<int> out;
  for (auto& fe : fans_[v].entries) out.push_back(fe.tri);
  return out;
}

SurfacePoint Surface::canonical(const SurfacePoint& p) const {
  LocalClass lc = classify_local(p.bary);
  if (lc.kind == 2) return p;
  if (lc.kind == 1) {
    int eid = tri_edges_[p.tri][lc.idx];
    const MeshEdge& e = edges_[eid];
    // param along global orientation a->b
    int va = tris_[p.tri].v[lc.idx];
    double t = (va == e.a) ? lc.param : 1 - lc.param;
    if (t <= kClassifyTol) return canonical_vertex_point(e.a);
    if (t >= 1 - kClassifyTol) return canonical_vertex_point(e.b);
    int tcan = e.tri[0];
    if (e.tri[1] >= 0) tcan = std::min(e.tri[0], e.tri[1]);
    int side = (tcan == e.tri[0]) ? e.side[0] : e.side[1];
    double s = (tris_[tcan].v[side] == e.a) ? t : 1 - t;
    SurfacePoint q;
    q.tri = tcan;
    q.bary = {0, 0, 0};
    q.bary[side] = 1 - s;
    q.bary[(side + 1) % 3] = s;
    return q;
  }
  return canonical_vertex_point(tris_[p.tri].v[lc.idx]);
}

SurfacePoint Surface::canonical_vertex_point(int v) const {
  int tcan = fans_[v].entries.front().tri;
  int ccan = fans_[v].entries.front().corner;
  for (auto& fe : fans_[v].entries)
    if (fe.tri < tcan) {
      tcan = fe.tri;
      ccan = fe.corner;
    }
  SurfacePoint q;
  q.tri = tcan;
  q.bary = {0, 0, 0};
  q.bary[ccan] = 1;
  return q;
}

PointKey Surface::key(const SurfacePoint& p) const {
  SurfacePoint c = canonical(p);
  LocalClass lc = classify_local(c.bary);
  if (lc.kind == 0) return {0, tris_[c.tri].v[lc.idx], 0, 0};
  if (lc.kind == 1) {
    int eid = tri_edges_[c.tri][lc.idx];
    const MeshEdge& e = edges_[eid];
    int va = tris_[c.tri].v[lc.idx];
    double t = (va == e.a) ? lc.param : 1 - lc.param;
    int64_t q = llround(t * 1e9);
    if (q <= 0) return {0, e.a, 0, 0};
    if (q >= 1000000000) return {0, e.b, 0, 0};
    return {1, eid, q, 0};
  }
  int64_t q0 = llround(c.bary[0] * 1e9);
  int64_t q1 = llround(c.bary[1] * 1e9);
  return {2, c.tri, q0, q1};
}

SurfacePoint Surface::rebase(const SurfacePoint& p, int t) const {
  if (p.tri == t) return p;
  LocalClass lc = classify_local(p.bary);
  if (lc.kind == 0) {
    int v = tris_[p.tri].v[lc.idx];
    for (int c = 0; c < 3; ++c)
      if (tris_[t].v[c] == v) {
        SurfacePoint q;
        q.tri = t;
        q.bary = {0, 0, 0};
        q.bary[c] = 1;
        return q;
      }
    throw std::logic_error("rebase: vertex not in target triangle");
  }
  if (lc.kind == 1) {
    int eid = tri_edges_[p.tri][lc.idx];
    const MeshEdge& e = edges_[eid];
    int va = tris_[p.tri].v[lc.idx];
    double tglob = (va == e.a) ? lc.param : 1 - lc.param;
    for (int side = 0; side < 3; ++side)
      if (tri_edges_[t][side] == eid) {
        double s = (tris_[t].v[side] == e.a) ? tglob : 1 - tglob;
        SurfacePoint q;
        q.tri = t;
        q.bary = {0, 0, 0};
        q.bary[side] = 1 - s;
        q.bary[(side + 1) % 3] = s;
        return q;
      }
    throw std::logic_error("rebase: edge not in target triangle");
  }
  throw std::logic_error("rebase: interior point of another triangle");
}

Vec2 Surface::point_in_layout(const SurfacePoint& p, int t) const {
  SurfacePoint q = rebase(p, t);
  auto L = layout(t);
  return L[0] * q.bary[0] + L[1] * q.bary[1] + L[2] * q.bary[2];
}

Vec3 Surface::position(const SurfacePoint& p) const {
  const auto& pos = *positions_;
  const Triangle& t = tris_[p.tri];
  return pos[t.v[0]] * p.bary[0] + pos[t.v[1]] * p.bary[1] +
         pos[t.v[2]] * p.bary[2];
}

// ---------------------------------------------------------------------------
// node graph

SurfacePoint Surface::node_point(int node) const {
  if (node < vertex_count_) return canonical_vertex_point(node);
  int K = steiner_per_edge_;
  int e = (node - vertex_count_) / K;
  int j = (node - vertex_count_) % K + 1;
  double t = (double)j / (K + 1);
  const MeshEdge& me = edges_[e];
  int tcan = me.tri[1] >= 0 ? std::min(me.tri[0], me.tri[1]) : me.tri[0];
  int side = (tcan == me.tri[0]) ? me.side[0] : me.side[1];
  double s = (tris_[tcan].v[side] == me.a) ? t : 1 - t;
  SurfacePoint q;
  q.tri = tcan;
  q.bary = {0, 0, 0};
  q.bary[side] = 1 - s;
  q.bary[(side + 1) % 3] = s;
  return q;
}

std::optional<int> Surface::point_node(const SurfacePoint& p) const {
  LocalClass lc = classify_local(p.bary);
  if (lc.kind == 0) return tris_[p.tri].v[lc.idx];
  if (lc.kind == 2) return std::nullopt;
  int K = steiner_per_edge_;
  if (K == 0) return std::nullopt;
  int eid = tri_edges_[p.tri][lc.idx];
  const MeshEdge& e = edges_[eid];
  int va = tris_[p.tri].v[lc.idx];
  double t = (va == e.a) ? lc.param : 1 - lc.param;
  double j = t * (K + 1);
  double jr = std::round(j);
  if (std::abs(j - jr) > 1e-9 * (K + 1)) return std::nullopt;
  int ji = (int)jr;
  if (ji <= 0 || ji > K) return std::nullopt;
  return vertex_count_ + eid * K + (ji - 1);
}

void Surface::build_node_graph() {
  int K = steiner_per_edge_ = (1 << steiner_level_) - 1;
  node_count_ = vertex_count_ + (int)edges_.size() * K;

  // Enumerate arcs twice: degree count, then fill.
  std::vector<int> deg(node_count_, 0);
  auto edge_node = [&](int e, int j) { return vertex_count_ + e * K + (j - 1); };

  struct Arc {
    int u, v;
    double w;
    int tri;  // >=0 chord triangle, -(e+1) along edge e
  };
  std::vector<Arc> arcs;
  // along-edge chains
  for (size_t e = 0; e < edges_.size(); ++e) {
    double step = edges_[e].len / (K + 1);
    int prev = edges_[e].a;
    for (int j = 1; j <= K; ++j) {
      arcs.push_back({prev, edge_node((int)e, j), step, -(int)e - 1});
      prev = edge_node((int)e, j);
    }
    arcs.push_back({prev, edges_[e].b, step, -(int)e - 1});
  }
  // per-triangle chords between nodes on different sides
  for (size_t t = 0; t < tris_.size(); ++t) {
    auto L = layout((int)t);
    // gather nodes per side (params in side direction) incl. positions
    struct BN {
      int node;
      int side;  // -1 for corners
      Vec2 pos;
    };
    std::vector<BN> corner_nodes(3), side_nodes;
    for (int c = 0; c < 3; ++c)
      corner_nodes[c] = {tris_[t].v[c], -1, L[c]};
    for (int sd = 0; sd < 3; ++sd) {
      int eid = tri_edges_[t][sd];
      const MeshEdge& e = edges_[eid];
      for (int j = 1; j <= K; ++j) {
        double tg = (double)j / (K + 1);
        double s = (tris_[t].v[sd] == e.a) ? tg : 1 - tg;
        Vec2 pos = L[sd] + (L[(sd + 1) % 3] - L[sd]) * s;
        side_nodes.push_back({edge_node(eid, j), sd, pos});
      }
    }
    // side-node x side-node on different sides
    for (size_t i = 0; i < side_nodes.size(); ++i)
      for (size_t j = i + 1; j < side_nodes.size(); ++j)
        if (side_nodes[i].side != side_nodes[j].side)
          arcs.push_back({side_nodes[i].node, side_nodes[j].node,
                          dist(side_nodes[i].pos, side_nodes[j].pos), (int)t});
    // corner c x interior nodes of the opposite side (c+1)%3
    for (int c = 0; c < 3; ++c)
      for (auto& sn : side_nodes)
        if (sn.side == (c + 1) % 3)
          arcs.push_back({corner_nodes[c].node, sn.node,
                          dist(corner_nodes[c].pos, sn.pos), (int)t});
  }

  for (auto& a : arcs) {
    ++deg[a.u];
    ++deg[a.v];
  }
  csr_off_.assign(node_count_ + 1, 0);
  for (int n = 0; n < node_count_; ++n) csr_off_[n + 1] = csr_off_[n] + deg[n];
  csr_adj_.assign(csr_off_.back(), -1);
  csr_w_.assign(csr_off_.back(), 0);
  csr_tri_.assign(csr_off_.back(), 0);
  std::vector<int> cur(csr_off_.begin(), csr_off_.end() - 1);
  for (auto& a : arcs) {
    csr_adj_[cur[a.u]] = a.v;
    csr_w_[cur[a.u]] = a.w;
    csr_tri_[cur[a.u]] = a.tri;
    ++cur[a.u];
    csr_adj_[cur[a.v]] = a.u;
    csr_w_[cur[a.v]] = a.w;
    csr_tri_[cur[a.v]] = a.tri;
    ++cur[a.v];
  }

  // pool density radius: farthest any point of a triangle can be from the
  // nearest node on that triangle's boundary
  double rho = 0;
  for (size_t t = 0; t < tris_.size(); ++t) {
    auto L = layout((int)t);
    std::vector<Vec2> nodes;
    for (int c = 0; c < 3; ++c) nodes.push_back(L[c]);
    for (int sd = 0; sd < 3; ++sd)
      for (int j = 1; j <= K; ++j) {
        double s = (double)j / (K + 1);
        nodes.push_back(L[sd] + (L[(sd + 1) % 3] - L[sd]) * s);
      }
    const int G = 8;
    for (int i = 0; i <= G; ++i)
      for (int j = 0; i + j <= G; ++j) {
        double b0 = (double)i / G, b1 = (double)j / G, b2 = 1 - b0 - b1;
        Vec2 p = L[0] * b0 + L[1] * b1 + L[2] * b2;
        double best = 1e300;
        for (auto& n : nodes) best = std::min(best, dist(p, n));
        rho = std::max(rho, best);
      }
  }
  node_density_radius_ = rho;
}

}  // namespace trigonal
