#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "trigonal/surface.hpp"

namespace trigonal {

// ===========================================================================
// NodeDijkstra

NodeDijkstra::NodeDijkstra(const Surface& s) : s_(s) {
  dist_.assign(s.node_count(), kInf);
  parent_.assign(s.node_count(), -1);
  seen_.assign(s.node_count(), 0);
}

void NodeDijkstra::reset() {
  for (int n : touched_) {
    dist_[n] = kInf;
    parent_[n] = -1;
    seen_[n] = 0;
  }
  touched_.clear();
  heap_.clear();
}

namespace {
struct HeapCmp {
  bool operator()(const std::pair<double, int>& a,
                  const std::pair<double, int>& b) const {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  }
};
}  // namespace

bool NodeDijkstra::arc_allowed(int code, const Options& opt) const {
  if (!opt.tri_mask) return true;
  if (code >= 0) return (*opt.tri_mask)[code];
  const MeshEdge& e = s_.edge(-code - 1);
  if ((*opt.tri_mask)[e.tri[0]]) return true;
  return e.tri[1] >= 0 && (*opt.tri_mask)[e.tri[1]];
}

void NodeDijkstra::drain(const Options& opt) {
  std::make_heap(heap_.begin(), heap_.end(), HeapCmp{});
  const auto& off = s_.graph_offsets();
  const auto& adj = s_.graph_targets();
  const auto& w = s_.graph_weights();
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), HeapCmp{});
    auto [d, u] = heap_.back();
    heap_.pop_back();
    if (seen_[u] || d > dist_[u]) continue;
    seen_[u] = 1;
    if (u == opt.target_node) return;
    if (opt.radius_cap >= 0 && d > opt.radius_cap) continue;
    for (int i = off[u]; i < off[u + 1]; ++i) {
      int v = adj[i];
      double nd = d + w[i];
      if (nd < dist_[v] && !seen_[v]) {
        if (!arc_allowed(s_.graph_arc_tris()[i], opt)) continue;
        if (dist_[v] == kInf) touched_.push_back(v);
        dist_[v] = nd;
        parent_[v] = u;
        heap_.push_back({nd, v});
        std::push_heap(heap_.begin(), heap_.end(), HeapCmp{});
      }
    }
  }
}

void NodeDijkstra::run_nodes(const std::vector<int>& sources,
                             const Options& opt) {
  reset();
  for (int src : sources) {
    if (dist_[src] != 0) {
      if (dist_[src] == kInf) touched_.push_back(src);
      dist_[src] = 0;
      parent_[src] = -1;
      heap_.push_back({0, src});
    }
  }
  drain(opt);
}

void NodeDijkstra::run_point(const SurfacePoint& src, const Options& opt) {
  auto node = s_.point_node(src);
  if (node) {
    run_nodes({*node}, opt);
    return;
  }
  reset();
  seed_point(src, opt);
  drain(opt);
}

void NodeDijkstra::seed_point(const SurfacePoint& src, const Options& opt) {
  for (int t : s_.incident_tris(src)) {
    if (opt.tri_mask && !(*opt.tri_mask)[t]) continue;
    Vec2 p = s_.point_in_layout(src, t);
    auto L = s_.layout(t);
    auto push_seed = [&](int n, Vec2 npos) {
      double d = (p - npos).norm();
      if (d < dist_[n]) {
        if (dist_[n] == kInf) touched_.push_back(n);
        dist_[n] = d;
        parent_[n] = -2;
        heap_.push_back({d, n});
      }
    };
    for (int c = 0; c < 3; ++c) push_seed(s_.tri(t).v[c], L[c]);
    int K = s_.steiner_per_edge();
    for (int sd = 0; sd < 3; ++sd) {
      int eid = s_.tri_edge(t, sd);
      const MeshEdge& e = s_.edge(eid);
      for (int j = 1; j <= K; ++j) {
        double tg = (double)j / (K + 1);
        double sp = (s_.tri(t).v[sd] == e.a) ? tg : 1 - tg;
        Vec2 pos = L[sd] + (L[(sd + 1) % 3] - L[sd]) * sp;
        push_seed(s_.vertex_count() + eid * K + (j - 1), pos);
      }
    }
  }
}

// Distance from the current field to an arbitrary point (virtual target).
double NodeDijkstra::eval_point(const SurfacePoint& dst,
                                const std::vector<char>* tri_mask) const {
  auto node = s_.point_node(dst);
  if (node) return dist_[*node];
  double best = kInf;
  for (int t : s_.incident_tris(dst)) {
    if (tri_mask && !(*tri_mask)[t]) continue;
    Vec2 p = s_.point_in_layout(dst, t);
    auto L = s_.layout(t);
    for (int c = 0; c < 3; ++c) {
      int n = s_.tri(t).v[c];
      if (dist_[n] < kInf) best = std::min(best, dist_[n] + (p - L[c]).norm());
    }
    int K = s_.steiner_per_edge();
    for (int sd = 0; sd < 3; ++sd) {
      int eid = s_.tri_edge(t, sd);
      const MeshEdge& e = s_.edge(eid);
      for (int j = 1; j <= K; ++j) {
        double tg = (double)j / (K + 1);
        double sp = (s_.tri(t).v[sd] == e.a) ? tg : 1 - tg;
        Vec2 pos = L[sd] + (L[(sd + 1) % 3] - L[sd]) * sp;
        int n = s_.vertex_count() + eid * K + (j - 1);
        if (dist_[n] < kInf) best = std::min(best, dist_[n] + (p - pos).norm());
      }
    }
  }
  return best;
}

// Best settled node toward a virtual target (node minimizing dist+chord).
int NodeDijkstra::eval_point_node(const SurfacePoint& dst,
                                  const std::vector<char>* tri_mask) const {
  auto node = s_.point_node(dst);
  if (node) return *node;
  double best = kInf;
  int bn = -1;
  for (int t : s_.incident_tris(dst)) {
    if (tri_mask && !(*tri_mask)[t]) continue;
    Vec2 p = s_.point_in_layout(dst, t);
    auto L = s_.layout(t);
    auto consider = [&](int n, Vec2 npos) {
      if (dist_[n] < kInf && dist_[n] + (p - npos).norm() < best) {
        best = dist_[n] + (p - npos).norm();
        bn = n;
      }
    };
    for (int c = 0; c < 3; ++c) consider(s_.tri(t).v[c], L[c]);
    int K = s_.steiner_per_edge();
    for (int sd = 0; sd < 3; ++sd) {
      int eid = s_.tri_edge(t, sd);
      const MeshEdge& e = s_.edge(eid);
      for (int j = 1; j <= K; ++j) {
        double tg = (double)j / (K + 1);
        double sp = (s_.tri(t).v[sd] == e.a) ? tg : 1 - tg;
        Vec2 pos = L[sd] + (L[(sd + 1) % 3] - L[sd]) * sp;
        consider(s_.vertex_count() + eid * K + (j - 1), pos);
      }
    }
  }
  return bn;
}

std::vector<int> NodeDijkstra::path_nodes(int node) const {
  std::vector<int> out;
  for (int n = node; n >= 0; n = parent_[n]) {
    out.push_back(n);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

// ===========================================================================
// Straightening

namespace {

struct Crossing {
  int edge;
  int tri_after;
};

struct Anchor {
  SurfacePoint pt;
  int vertex = -1;   // mesh vertex id when the anchor sits at a vertex
  int tri_out = -1;  // triangle carrying the outgoing segment
};

struct Route {
  std::vector<Anchor> anchors;
  std::vector<std::vector<Crossing>> runs;
};

struct RunResult {
  double length = 0;
  std::vector<double> params;  // per crossing: param along edge a->b
  struct Apex {
    int cross_idx;
    int vertex;
  };
  std::vector<Apex> apexes;
};

class Straightener {
 public:
  Straightener(const Surface& s, const std::vector<char>* mask)
      : s_(s), mask_(mask) {}

  double optimize(Route& route, std::vector<RunResult>& results) const;
  // optimize plus a sweep trying the other side of each vertex the path
  // passes next to (escapes single-vertex local minima)
  double optimize_full(Route& route, std::vector<RunResult>& results) const;
  GeodesicPath emit(const Route& route,
                    const std::vector<RunResult>& results) const;

 private:
  RunResult funnel(const Anchor& A, const std::vector<Crossing>& run,
                   const Anchor& B, int tri_in_B) const;
  bool funnel_all(Route& route, std::vector<RunResult>& results,
                  double& length) const;
  bool improve_vertices(Route& route,
                        const std::vector<RunResult>& results) const;
  void normalize(Route& route) const;

  int tri_in_of_anchor(const Route& r, size_t anchor_idx) const {
    const auto& run = r.runs[anchor_idx - 1];
    return run.empty() ? r.anchors[anchor_idx - 1].tri_out
                       : run.back().tri_after;
  }

  SurfacePoint edge_point(int eid, double t) const {
    const MeshEdge& e = s_.edge(eid);
    int tcan = e.tri[1] >= 0 ? std::min(e.tri[0], e.tri[1]) : e.tri[0];
    int side = (tcan == e.tri[0]) ? e.side[0] : e.side[1];
    double sp = (s_.tri(tcan).v[side] == e.a) ? t : 1 - t;
    SurfacePoint q;
    q.tri = tcan;
    q.bary = {0, 0, 0};
    q.bary[side] = 1 - sp;
    q.bary[(side + 1) % 3] = sp;
    return q;
  }

  // CCW angle at vertex v within triangle t from the corner's first spoke to
  // the direction (v -> pt); pt must be expressible in t.
  double dir_angle(int v, int t, const SurfacePoint& pt) const {
    int c = -1;
    for (int k = 0; k < 3; ++k)
      if (s_.tri(t).v[k] == v) c = k;
    if (c < 0) throw std::logic_error("dir_angle: vertex not in triangle");
    auto L = s_.layout(t);
    Vec2 origin = L[c];
    Vec2 spoke = L[(c + 1) % 3] - origin;
    Vec2 d = s_.point_in_layout(pt, t) - origin;
    double ang = std::atan2(spoke.cross(d), spoke.dot(d));
    if (ang < 0) ang = 0;  // clamp: directions inside the corner wedge
    double ca = s_.corner_angle(t, c);
    if (ang > ca) ang = ca;
    return ang;
  }

  const Surface& s_;
  const std::vector<char>* mask_;
};

RunResult Straightener::funnel(const Anchor& A, const std::vector<Crossing>& run,
                               const Anchor& B, int tri_in_B) const {
  RunResult out;
  int m = (int)run.size();
  int t0 = A.tri_out;
  auto cur = s_.layout(t0);
  int cur_tri = t0;
  Vec2 apos = s_.point_in_layout(A.pt, t0);

  struct Portal {
    Vec2 l, r;
    int vl = -1, vr = -1;
  };
  std::vector<Portal> portals((size_t)m + 2);
  portals[0] = {apos, apos, -1, -1};
  for (int i = 1; i <= m; ++i) {
    int eid = run[i - 1].edge;
    int sd = -1;
    for (int k = 0; k < 3; ++k)
      if (s_.tri_edge(cur_tri, k) == eid) sd = k;
    if (sd < 0) throw std::logic_error("sleeve: crossing edge not in triangle");
    Portal p;
    p.r = cur[sd];
    p.l = cur[(sd + 1) % 3];
    p.vr = s_.tri(cur_tri).v[sd];
    p.vl = s_.tri(cur_tri).v[(sd + 1) % 3];
    portals[i] = p;
    int tn = run[i - 1].tri_after;
    int sdn = -1;
    for (int k = 0; k < 3; ++k)
      if (s_.tri_edge(tn, k) == eid) sdn = k;
    if (sdn < 0) throw std::logic_error("sleeve: inconsistent crossing");
    int va = s_.tri(tn).v[sdn], vb = s_.tri(tn).v[(sdn + 1) % 3];
    Vec2 P = (va == p.vl) ? p.l : p.r;
    Vec2 Q = (vb == p.vl) ? p.l : p.r;
    double dlen = dist(P, Q);
    double a = s_.tri(tn).len[(sdn + 2) % 3];
    double b = s_.tri(tn).len[(sdn + 1) % 3];
    double x = (dlen * dlen + a * a - b * b) / (2 * dlen);
    double h2 = a * a - x * x;
    double h = h2 > 0 ? std::sqrt(h2) : 0;
    Vec2 dir = (Q - P) * (1.0 / dlen);
    Vec2 nrm{-dir.y, dir.x};
    Vec2 third_prev = cur[(sd + 2) % 3];
    double side_prev = (third_prev - P).cross(Q - P);
    // note (third_prev-P) x (Q-P) > 0 means prev corner is right of P->Q
    Vec2 third = P + dir * x + nrm * ((side_prev < 0) ? -h : h);
    std::array<Vec2, 3> nxt;
    nxt[sdn] = P;
    nxt[(sdn + 1) % 3] = Q;
    nxt[(sdn + 2) % 3] = third;
    cur = nxt;
    cur_tri = tn;
  }
  if (cur_tri != tri_in_B)
    throw std::logic_error("sleeve: end triangle mismatch");
  SurfacePoint bq = s_.rebase(B.pt, cur_tri);
  Vec2 bpos = cur[0] * bq.bary[0] + cur[1] * bq.bary[1] + cur[2] * bq.bary[2];
  portals[(size_t)m + 1] = {bpos, bpos, -1, -1};

  struct CornerEv {
    int portal;
    Vec2 pos;
    int vertex;
  };
  std::vector<CornerEv> corners;
  auto area = [](Vec2 a, Vec2 b, Vec2 c) { return orient2d(a, b, c); };
  Vec2 apex = apos, lp = apos, rp = apos;
  int ai = 0, li = 0, ri = 0;
  int guard = 0;
  for (int i = 1; i <= m + 1; ++i) {
    if (++guard > 8 * (m + 2) * (m + 2) + 64)
      throw std::logic_error("funnel did not terminate");
    Vec2 pl = portals[i].l, pr = portals[i].r;
    if (area(apex, rp, pr) >= 0) {
      if (ai == ri || li == ai || area(apex, lp, pr) < 0) {
        rp = pr;
        ri = i;
      } else {
        corners.push_back({li, lp, portals[li].vl});
        apex = lp;
        ai = li;
        lp = apex;
        rp = apex;
        ri = ai;
        i = ai;
        continue;
      }
    }
    if (area(apex, lp, pl) <= 0) {
      if (ai == li || ri == ai || area(apex, rp, pl) > 0) {
        lp = pl;
        li = i;
      } else {
        corners.push_back({ri, rp, portals[ri].vr});
        apex = rp;
        ai = ri;
        lp = apex;
        rp = apex;
        li = ai;
        i = ai;
        continue;
      }
    }
  }

  std::vector<std::pair<int, Vec2>> pts;
  pts.push_back({0, apos});
  for (auto& c : corners) pts.push_back({c.portal, c.pos});
  pts.push_back({m + 1, bpos});

  out.params.assign(m, -1);
  for (size_t seg = 0; seg + 1 < pts.size(); ++seg) {
    Vec2 P = pts[seg].second, Q = pts[seg + 1].second;
    out.length += dist(P, Q);
    for (int i = pts[seg].first + 1; i < pts[seg + 1].first; ++i) {
      Vec2 pl = portals[i].l, pr = portals[i].r;
      double a0 = area(P, Q, pl), a1 = area(P, Q, pr);
      double u = (std::abs(a0 - a1) < 1e-300) ? 0.5 : a0 / (a0 - a1);
      u = std::clamp(u, 1e-12, 1 - 1e-12);
      const MeshEdge& e = s_.edge(run[i - 1].edge);
      double t = (portals[i].vl == e.a) ? u : 1 - u;
      out.params[i - 1] = t;
    }
  }
  for (auto& c : corners)
    if (c.portal >= 1 && c.portal <= m)
      out.apexes.push_back({c.portal - 1, c.vertex});
  std::sort(out.apexes.begin(), out.apexes.end(),
            [](const RunResult::Apex& a, const RunResult::Apex& b) {
              return a.cross_idx < b.cross_idx;
            });
  return out;
}

bool Straightener::funnel_all(Route& route, std::vector<RunResult>& results,
                              double& length) const {
  results.clear();
  length = 0;
  for (size_t k = 0; k < route.runs.size(); ++k) {
    int tin = tri_in_of_anchor(route, k + 1);
    RunResult rr =
        funnel(route.anchors[k], route.runs[k], route.anchors[k + 1], tin);
    length += rr.length;
    if (!rr.apexes.empty()) {
      auto ap = rr.apexes.front();
      const auto& run = route.runs[k];
      Anchor na;
      na.vertex = ap.vertex;
      na.pt = s_.canonical_vertex_point(ap.vertex);
      na.tri_out = run[ap.cross_idx].tri_after;
      std::vector<Crossing> left(run.begin(), run.begin() + ap.cross_idx);
      std::vector<Crossing> right(run.begin() + ap.cross_idx + 1, run.end());
      route.anchors.insert(route.anchors.begin() + k + 1, na);
      route.runs[k] = std::move(left);
      route.runs.insert(route.runs.begin() + k + 1, std::move(right));
      return true;
    }
    results.push_back(std::move(rr));
  }
  return false;
}

bool Straightener::improve_vertices(Route& route,
                                    const std::vector<RunResult>& results) const {
  const double PI = std::acos(-1.0);
  for (size_t k = 1; k + 1 < route.anchors.size(); ++k) {
    Anchor& anc = route.anchors[k];
    if (anc.vertex < 0) continue;
    int v = anc.vertex;
    const VertexFan& fan = s_.fan(v);
    int tA = tri_in_of_anchor(route, k);
    int tB = anc.tri_out;
    PointKey anchor_key = s_.key(anc.pt);
    // Supporting neighbors for the direction test. Crossings whose pulled
    // position pins at the vertex itself are part of the vertex pass: skip
    // them here and drop them if we reroute.
    SurfacePoint prev_pt;
    const auto& run_in = route.runs[k - 1];
    int keep_in = (int)run_in.size();  // run_in[0..keep_in) stays
    {
      int idx = (int)run_in.size() - 1;
      while (idx >= 0) {
        SurfacePoint cand =
            edge_point(run_in[idx].edge, results[k - 1].params[idx]);
        if (!(s_.key(cand) == anchor_key)) {
          prev_pt = cand;
          tA = run_in[idx].tri_after;
          break;
        }
        --idx;
      }
      keep_in = idx + 1;
      if (idx < 0) {
        prev_pt = route.anchors[k - 1].pt;
        tA = route.anchors[k - 1].tri_out;
      }
    }
    SurfacePoint next_pt;
    const auto& run_out = route.runs[k];
    size_t keep_out = 0;  // run_out[keep_out..) stays
    {
      size_t idx = 0;
      bool found = false;
      for (; idx < run_out.size(); ++idx) {
        SurfacePoint cand =
            edge_point(run_out[idx].edge, results[k].params[idx]);
        if (!(s_.key(cand) == anchor_key)) {
          next_pt = cand;
          tB = idx == 0 ? anc.tri_out : run_out[idx - 1].tri_after;
          found = true;
          break;
        }
      }
      keep_out = idx;
      if (!found) {
        next_pt = route.anchors[k + 1].pt;
        // tB must carry the outgoing segment toward the next anchor
        if (!run_out.empty()) tB = run_out.back().tri_after;
      }
    }
    // Dropped pinned crossings must be edges incident to v for the splice to
    // stay a valid sleeve; otherwise leave this anchor alone.
    bool droppable = true;
    for (int i2 = keep_in; i2 < (int)run_in.size(); ++i2) {
      const MeshEdge& e = s_.edge(run_in[i2].edge);
      if (e.a != v && e.b != v) droppable = false;
    }
    for (size_t i2 = 0; i2 < keep_out; ++i2) {
      const MeshEdge& e = s_.edge(route.runs[k][i2].edge);
      if (e.a != v && e.b != v) droppable = false;
    }
    if (!droppable) continue;
    int ia = -1, ib = -1;
    for (size_t i = 0; i < fan.entries.size(); ++i) {
      if (fan.entries[i].tri == tA) ia = (int)i;
      if (fan.entries[i].tri == tB) ib = (int)i;
    }
    if (ia < 0 || ib < 0) throw std::logic_error("vertex fan mismatch");
    if (s_.key(prev_pt) == s_.key(anc.pt) || s_.key(next_pt) == s_.key(anc.pt))
      continue;  // degenerate neighbor; cannot evaluate a direction
    double abs_in = fan.entries[ia].angle_off + dir_angle(v, tA, prev_pt);
    double abs_out = fan.entries[ib].angle_off + dir_angle(v, tB, next_pt);
    const double INFA = 1e100;
    double a_ccw, a_cw;
    if (!fan.boundary) {
      a_ccw = abs_out - abs_in;
      while (a_ccw < 0) a_ccw += fan.total_angle;
      while (a_ccw >= fan.total_angle) a_ccw -= fan.total_angle;
      a_cw = fan.total_angle - a_ccw;
    } else {
      if (abs_out >= abs_in) {
        a_ccw = abs_out - abs_in;
        a_cw = INFA;
      } else {
        a_cw = abs_in - abs_out;
        a_ccw = INFA;
      }
    }
    bool ccw_ok = a_ccw < PI - 1e-12;
    bool cw_ok = a_cw < PI - 1e-12;
    if (!ccw_ok && !cw_ok) continue;
    bool use_ccw = ccw_ok && (!cw_ok || a_ccw <= a_cw);
    std::vector<Crossing> mid;
    int n = (int)fan.entries.size();
    bool blocked = false;
    int i = ia;
    while (i != ib) {
      int j;
      int spoke;
      if (use_ccw) {
        j = (i + 1) % n;
        if (fan.boundary && j == 0) {
          blocked = true;
          break;
        }
        spoke = s_.tri_edge(fan.entries[i].tri,
                            (fan.entries[i].corner + 2) % 3);
      } else {
        j = (i - 1 + n) % n;
        if (fan.boundary && i == 0) {
          blocked = true;
          break;
        }
        spoke = s_.tri_edge(fan.entries[i].tri, fan.entries[i].corner);
      }
      if (mask_ && !(*mask_)[fan.entries[j].tri]) {
        blocked = true;
        break;
      }
      mid.push_back({spoke, fan.entries[j].tri});
      i = j;
      if ((int)mid.size() > n + 1) throw std::logic_error("fan loop");
    }
    if (blocked) continue;
    std::vector<Crossing> merged(route.runs[k - 1].begin(),
                                 route.runs[k - 1].begin() + keep_in);
    merged.insert(merged.end(), mid.begin(), mid.end());
    merged.insert(merged.end(), route.runs[k].begin() + keep_out,
                  route.runs[k].end());
    route.runs[k - 1] = std::move(merged);
    route.runs.erase(route.runs.begin() + k);
    route.anchors.erase(route.anchors.begin() + k);
    return true;
  }
  return false;
}

void Straightener::normalize(Route& route) const {
  // merge consecutive anchors pinned at the same mesh vertex
  for (size_t k = 1; k < route.anchors.size();) {
    if (route.anchors[k].vertex >= 0 &&
        route.anchors[k].vertex == route.anchors[k - 1].vertex) {
      route.anchors[k - 1].tri_out = route.anchors[k].tri_out;
      route.anchors.erase(route.anchors.begin() + k);
      route.runs.erase(route.runs.begin() + (k - 1));
    } else {
      ++k;
    }
  }
  // empty runs need a triangle shared by both anchors
  for (size_t k = 0; k < route.runs.size(); ++k) {
    if (!route.runs[k].empty()) continue;
    const SurfacePoint& a = route.anchors[k].pt;
    const SurfacePoint& b = route.anchors[k + 1].pt;
    auto ta = s_.incident_tris(a);
    auto tb = s_.incident_tris(b);
    int best = -1;
    for (int x : ta)
      for (int y : tb)
        if (x == y && (best < 0 || x < best)) best = x;
    if (best < 0) throw std::logic_error("route: disconnected empty run");
    route.anchors[k].tri_out = best;
  }
}

double Straightener::optimize(Route& route,
                              std::vector<RunResult>& results) const {
  double length = 0;
  Route best_route;
  std::vector<RunResult> best_results;
  double best_len = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int iter = 0; iter < 400; ++iter) {
    normalize(route);
    if (funnel_all(route, results, length)) continue;  // split happened
    if (length < best_len - 1e-15) {
      best_len = length;
      best_route = route;
      best_results = results;
      stagnant = 0;
    } else if (length > best_len + 1e-12) {
      // numerical oscillation: restore the best seen and stop
      route = best_route;
      results = best_results;
      return best_len;
    } else if (++stagnant > 8) {
      route = best_route;
      results = best_results;
      return best_len;
    }
    if (!improve_vertices(route, results)) return length;
  }
  route = best_route.anchors.empty() ? route : best_route;
  results = best_results.empty() ? results : best_results;
  return best_len == std::numeric_limits<double>::infinity() ? length
                                                             : best_len;
}

// Build the candidate route that passes vertex v on the other side, if the
// current route has a contiguous crossing block over edges incident to v.
static bool reroute_other_side(const Surface& s, const std::vector<char>* mask,
                               const Route& route, int v, Route& out) {
  for (size_t r = 0; r < route.runs.size(); ++r) {
    const auto& run = route.runs[r];
    int i = -1, j = -1;
    for (size_t c = 0; c < run.size(); ++c) {
      const MeshEdge& e = s.edge(run[c].edge);
      if (e.a == v || e.b == v) {
        if (i < 0) i = (int)c;
        j = (int)c;
      } else if (i >= 0) {
        break;  // only the first contiguous block
      }
    }
    if (i < 0) continue;
    int t_in = i == 0 ? route.anchors[r].tri_out : run[i - 1].tri_after;
    int t_out = run[j].tri_after;
    const VertexFan& fan = s.fan(v);
    int n = (int)fan.entries.size();
    int ia = -1, ib = -1;
    for (int q = 0; q < n; ++q) {
      if (fan.entries[q].tri == t_in) ia = q;
      if (fan.entries[q].tri == t_out) ib = q;
    }
    if (ia < 0 || ib < 0 || ia == ib) continue;
    // which side does the current block use?
    int first_ccw = s.tri_edge(fan.entries[ia].tri,
                               (fan.entries[ia].corner + 2) % 3);
    bool cur_ccw = (run[i].edge == first_ccw);
    bool alt_ccw = !cur_ccw;
    std::vector<Crossing> mid;
    int q = ia;
    bool blocked = false;
    while (q != ib) {
      int nq;
      int spoke;
      if (alt_ccw) {
        nq = (q + 1) % n;
        if (fan.boundary && nq == 0) {
          blocked = true;
          break;
        }
        spoke = s.tri_edge(fan.entries[q].tri, (fan.entries[q].corner + 2) % 3);
      } else {
        nq = (q - 1 + n) % n;
        if (fan.boundary && q == 0) {
          blocked = true;
          break;
        }
        spoke = s.tri_edge(fan.entries[q].tri, fan.entries[q].corner);
      }
      if (mask && !(*mask)[fan.entries[nq].tri]) {
        blocked = true;
        break;
      }
      mid.push_back({spoke, fan.entries[nq].tri});
      q = nq;
      if ((int)mid.size() > n + 1) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    out = route;
    auto& orun = out.runs[r];
    std::vector<Crossing> merged(orun.begin(), orun.begin() + i);
    merged.insert(merged.end(), mid.begin(), mid.end());
    merged.insert(merged.end(), orun.begin() + j + 1, orun.end());
    orun = std::move(merged);
    return true;
  }
  return false;
}

double Straightener::optimize_full(Route& route,
                                   std::vector<RunResult>& results) const {
  double len = optimize(route, results);
  for (int sweep = 0; sweep < 12; ++sweep) {
    // vertices the path passes next to, in path order
    std::vector<int> cand;
    for (auto& run : route.runs)
      for (auto& c : run) {
        const MeshEdge& e = s_.edge(c.edge);
        for (int v : {e.a, e.b})
          if (std::find(cand.begin(), cand.end(), v) == cand.end())
            cand.push_back(v);
      }
    bool improved = false;
    for (int v : cand) {
      Route alt;
      if (!reroute_other_side(s_, mask_, route, v, alt)) continue;
      std::vector<RunResult> alt_results;
      double alt_len;
      try {
        alt_len = optimize(alt, alt_results);
      } catch (const std::logic_error&) {
        continue;  // degenerate alternative; keep the current route
      }
      if (alt_len < len - 1e-15) {
        route = std::move(alt);
        results = std::move(alt_results);
        len = alt_len;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return len;
}

GeodesicPath Straightener::emit(const Route& route,
                                const std::vector<RunResult>& results) const {
  GeodesicPath gp;
  PointKey last{};
  auto push = [&](const SurfacePoint& p) {
    SurfacePoint c = s_.canonical(p);
    PointKey k = s_.key(c);
    if (!gp.points.empty() && k == last) return;
    gp.points.push_back(c);
    last = k;
  };
  push(route.anchors[0].pt);
  for (size_t k = 0; k < route.runs.size(); ++k) {
    const auto& run = route.runs[k];
    for (size_t i = 0; i < run.size(); ++i)
      push(edge_point(run[i].edge, results[k].params[i]));
    gp.length += results[k].length;
    push(route.anchors[k + 1].pt);
  }
  return gp;
}

// Route construction from a Dijkstra node chain.
// `nodes` are interior chain nodes; src/dst are the query endpoints.
Route build_route(const Surface& s, const SurfacePoint& src,
                  const SurfacePoint& dst, const std::vector<int>& nodes) {
  // item list: src, nodes..., dst with an arc triangle between consecutive
  struct Item {
    SurfacePoint pt;
    int node = -1;  // graph node id when applicable
  };
  std::vector<Item> items;
  items.push_back({src, -1});
  for (int n : nodes) items.push_back({s.node_point(n), n});
  items.push_back({dst, -1});

  auto common_tri = [&](const SurfacePoint& a, const SurfacePoint& b) {
    auto ta = s.incident_tris(a);
    auto tb = s.incident_tris(b);
    int best = -1;
    for (int x : ta)
      for (int y : tb)
        if (x == y && (best < 0 || x < best)) best = x;
    return best;
  };

  int m = (int)items.size();
  std::vector<int> arc_tri(m - 1, -1);
  const auto& off = s.graph_offsets();
  const auto& adj = s.graph_targets();
  for (int i = 0; i + 1 < m; ++i) {
    const Item& a = items[i];
    const Item& b = items[i + 1];
    int code = std::numeric_limits<int>::min();
    if (a.node >= 0 && b.node >= 0) {
      for (int k = off[a.node]; k < off[a.node + 1]; ++k)
        if (adj[k] == b.node) {
          code = s.graph_arc_tris()[k];
          if (code >= 0) break;  // prefer a chord entry
        }
    }
    int t;
    if (code == std::numeric_limits<int>::min()) {
      t = common_tri(a.pt, b.pt);
      if (t < 0) throw std::logic_error("route: no common triangle");
    } else if (code >= 0) {
      t = code;
    } else {
      // along-edge arc: keep the previous triangle when incident to e
      const MeshEdge& e = s.edge(-code - 1);
      int prev = (i > 0) ? arc_tri[i - 1] : -1;
      if (prev == e.tri[0] || (e.tri[1] >= 0 && prev == e.tri[1]))
        t = prev;
      else
        t = e.tri[1] >= 0 ? std::min(e.tri[0], e.tri[1]) : e.tri[0];
    }
    arc_tri[i] = t;
  }

  Route r;
  auto vertex_of = [&](int node) {
    return node >= 0 && node < s.vertex_count() ? node : -1;
  };
  Anchor a0;
  a0.pt = src;
  a0.vertex = -1;
  if (auto n = s.point_node(src); n && *n < s.vertex_count()) a0.vertex = *n;
  a0.tri_out = arc_tri.empty() ? common_tri(src, dst) : arc_tri[0];
  if (a0.tri_out < 0) throw std::logic_error("route: src triangle");
  r.anchors.push_back(a0);
  r.runs.push_back({});
  for (int i = 1; i + 1 < m; ++i) {
    int tA = arc_tri[i - 1], tB = arc_tri[i];
    int v = vertex_of(items[i].node);
    if (v >= 0) {
      Anchor an;
      an.pt = items[i].pt;
      an.vertex = v;
      an.tri_out = tB;
      r.anchors.push_back(an);
      r.runs.push_back({});
    } else {
      if (tA != tB) {
        // crossing of the node's edge
        int K = s.steiner_per_edge();
        int eid = (items[i].node - s.vertex_count()) / K;
        r.runs.back().push_back({eid, tB});
      }
      // same triangle on both sides: bounce point, dropped
    }
  }
  Anchor b0;
  b0.pt = dst;
  if (auto n = s.point_node(dst); n && *n < s.vertex_count()) b0.vertex = *n;
  b0.tri_out = -1;
  r.anchors.push_back(b0);
  return r;
}

}  // namespace

GeodesicPath Surface::straighten_node_path(const SurfacePoint& src,
                                           const SurfacePoint& dst,
                                           const std::vector<int>& nodes,
                                           const std::vector<int>* region) const {
  std::vector<char> mask;
  const std::vector<char>* maskp = nullptr;
  if (region) {
    mask.assign(tris_.size(), 0);
    for (int t : *region) mask[t] = 1;
    maskp = &mask;
  }
  Route route = build_route(*this, src, dst, nodes);
  Straightener st(*this, maskp);
  std::vector<RunResult> results;
  st.optimize_full(route, results);
  return st.emit(route, results);
}

// ===========================================================================
// public distance queries

namespace {
// Shared triangle of two points, or -1.
int shared_tri(const Surface& s, const SurfacePoint& a, const SurfacePoint& b) {
  auto ta = s.incident_tris(a);
  auto tb = s.incident_tris(b);
  int best = -1;
  for (int x : ta)
    for (int y : tb)
      if (x == y && (best < 0 || x < best)) best = x;
  return best;
}
}  // namespace

GeodesicPath Surface::geodesic_path(const SurfacePoint& p,
                                    const SurfacePoint& q) const {
  SurfacePoint pc = canonical(p), qc = canonical(q);
  PointKey kp = key(pc), kq = key(qc);
  if (kp == kq) return GeodesicPath{{pc}, 0};
  bool swapped = false;
  if (kq < kp) {
    std::swap(pc, qc);
    swapped = true;
  }

  // direct chord candidate when sharing a triangle
  double direct = std::numeric_limits<double>::infinity();
  int tshare = shared_tri(*this, pc, qc);
  if (tshare >= 0)
    direct = dist(point_in_layout(pc, tshare), point_in_layout(qc, tshare));

  NodeDijkstra dj(*this);
  NodeDijkstra::Options opt;
  auto qnode = point_node(qc);
  GeodesicPath best_path;
  double best = std::numeric_limits<double>::infinity();
  if (qnode) opt.target_node = *qnode;
  dj.run_point(pc, opt);
  int end_node = qnode ? *qnode : dj.eval_point_node(qc, nullptr);
  if (end_node >= 0 && dj.reached(end_node)) {
    std::vector<int> nodes = dj.path_nodes(end_node);
    // trim endpoint nodes that duplicate src/dst themselves
    auto pnode = point_node(pc);
    if (!nodes.empty() && pnode && nodes.front() == *pnode)
      nodes.erase(nodes.begin());
    if (!nodes.empty() && qnode && nodes.back() == *qnode) nodes.pop_back();
    GeodesicPath gp = straighten_node_path(pc, qc, nodes, nullptr);
    best = gp.length;
    best_path = std::move(gp);
  }
  if (direct < best) {
    best_path = GeodesicPath{{pc, qc}, direct};
    best = direct;
  }
  if (best_path.points.empty())
    throw std::logic_error("geodesic query failed to reach target");
  if (swapped)
    std::reverse(best_path.points.begin(), best_path.points.end());
  return best_path;
}

double Surface::geodesic_distance(const SurfacePoint& p,
                                  const SurfacePoint& q) const {
  return geodesic_path(p, q).length;
}

double Surface::node_graph_distance(int node_a, int node_b) const {
  NodeDijkstra dj(*this);
  NodeDijkstra::Options opt;
  opt.target_node = node_b;
  dj.run_nodes({node_a}, opt);
  return dj.dist(node_b);
}

std::vector<int> Surface::ball_points(
    const SurfacePoint& p, double r,
    const std::vector<SurfacePoint>& candidates) const {
  std::vector<int> out;
  for (size_t i = 0; i < candidates.size(); ++i)
    if (geodesic_distance(p, candidates[i]) < r) out.push_back((int)i);
  return out;
}

// ===========================================================================
// region diameter

double Surface::region_intrinsic_diameter(
    const std::vector<int>& region_tris) const {
  if (region_tris.empty()) throw PreconditionError("empty region");
  std::vector<char> mask(tris_.size(), 0);
  for (int t : region_tris) mask[t] = 1;

  // samples: region vertices + region edge midpoints
  std::vector<SurfacePoint> samples;
  std::vector<char> vseen(vertex_count_, 0);
  std::vector<char> eseen(edges_.size(), 0);
  for (int t : region_tris) {
    for (int c = 0; c < 3; ++c) {
      int v = tris_[t].v[c];
      if (!vseen[v]) {
        vseen[v] = 1;
        samples.push_back(canonical_vertex_point(v));
      }
    }
    for (int sd = 0; sd < 3; ++sd) {
      int e = tri_edges_[t][sd];
      if (!eseen[e]) {
        eseen[e] = 1;
        SurfacePoint mp;
        mp.tri = t;
        mp.bary = {0, 0, 0};
        mp.bary[sd] = 0.5;
        mp.bary[(sd + 1) % 3] = 0.5;
        samples.push_back(canonical(mp));
      }
    }
  }

  NodeDijkstra dj(*this);
  NodeDijkstra::Options opt;
  opt.tri_mask = &mask;
  struct Cand {
    double est;
    int i, j;
  };
  std::vector<Cand> cands;
  for (size_t i = 0; i < samples.size(); ++i) {
    dj.run_point(samples[i], opt);
    for (size_t j = i + 1; j < samples.size(); ++j) {
      double est = dj.eval_point(samples[j], &mask);
      int ts = shared_tri(*this, samples[i], samples[j]);
      if (ts >= 0 && mask[ts])
        est = std::min(est, dist(point_in_layout(samples[i], ts),
                                 point_in_layout(samples[j], ts)));
      if (est < NodeDijkstra::kInf) cands.push_back({est, (int)i, (int)j});
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.est > b.est; });
  double best = 0;
  for (auto& c : cands) {
    if (c.est <= best) break;  // graph estimates only overestimate
    // exact (straightened) distance within the region
    dj.run_point(samples[c.i], opt);
    int en = dj.eval_point_node(samples[c.j], &mask);
    double d;
    if (en < 0 || !dj.reached(en)) {
      int ts = shared_tri(*this, samples[c.i], samples[c.j]);
      if (ts < 0 || !mask[ts]) continue;
      d = dist(point_in_layout(samples[c.i], ts),
               point_in_layout(samples[c.j], ts));
    } else {
      std::vector<int> nodes = dj.path_nodes(en);
      auto pn = point_node(samples[c.i]);
      if (!nodes.empty() && pn && nodes.front() == *pn)
        nodes.erase(nodes.begin());
      auto qn = point_node(samples[c.j]);
      if (!nodes.empty() && qn && nodes.back() == *qn) nodes.pop_back();
      GeodesicPath gp =
          straighten_node_path(samples[c.i], samples[c.j], nodes, &region_tris);
      d = gp.length;
      int ts = shared_tri(*this, samples[c.i], samples[c.j]);
      if (ts >= 0 && mask[ts])
        d = std::min(d, dist(point_in_layout(samples[c.i], ts),
                             point_in_layout(samples[c.j], ts)));
    }
    best = std::max(best, d);
  }
  return best;
}

// ===========================================================================
// calibration

void Surface::calibrate() {
  delta_ = 1e-9;
  int stride = std::max<size_t>(1, edges_.size() / 160);
  NodeDijkstra dj(*this);
  for (size_t e = 0; e < edges_.size(); e += stride) {
    const MeshEdge& me = edges_[e];
    if (me.boundary()) continue;
    int tA = me.tri[0], sA = me.side[0];
    int tB = me.tri[1], sB = me.side[1];
    // midpoints of one other side in each triangle
    auto mid_of = [&](int t, int sd) {
      SurfacePoint p;
      p.tri = t;
      p.bary = {0, 0, 0};
      p.bary[sd] = 0.5;
      p.bary[(sd + 1) % 3] = 0.5;
      return p;
    };
    SurfacePoint P = mid_of(tA, (sA + 1) % 3);
    SurfacePoint Q = mid_of(tB, (sB + 1) % 3);
    // exact distance across the unfolded strip when the straight segment
    // crosses the shared edge properly
    auto LA = layout(tA);
    Vec2 pa = point_in_layout(P, tA);
    Vec2 ea = LA[sA], eb = LA[(sA + 1) % 3];
    // unfold tB across e
    double dlen = me.len;
    int va = tris_[tB].v[sB];
    bool va_at_sA = (va == tris_[tA].v[sA]);
    Vec2 Pb = va_at_sA ? ea : eb;  // position of tB.v[sB]
    Vec2 Qb = va_at_sA ? eb : ea;  // position of tB.v[sB+1]
    double a2 = tris_[tB].len[(sB + 2) % 3];
    double b2 = tris_[tB].len[(sB + 1) % 3];
    double x = (dlen * dlen + a2 * a2 - b2 * b2) / (2 * dlen);
    double h2 = a2 * a2 - x * x;
    double h = h2 > 0 ? std::sqrt(h2) : 0;
    Vec2 dirv = (Qb - Pb) * (1.0 / dlen);
    Vec2 nrm{-dirv.y, dirv.x};
    Vec2 thirdA = LA[(sA + 2) % 3];
    double side_prev = (thirdA - Pb).cross(Qb - Pb);
    Vec2 third = Pb + dirv * x + nrm * ((side_prev < 0) ? -h : h);
    // Q in unfolded chart: bary of Q in tB applied to tB corner positions
    std::array<Vec2, 3> curB;
    curB[sB] = Pb;
    curB[(sB + 1) % 3] = Qb;
    curB[(sB + 2) % 3] = third;
    SurfacePoint qb = Q;  // already in tB
    Vec2 pq = curB[0] * qb.bary[0] + curB[1] * qb.bary[1] + curB[2] * qb.bary[2];
    // proper crossing of the shared edge?
    double d0 = orient2d(pa, pq, ea), d1 = orient2d(pa, pq, eb);
    if ((d0 > 0) == (d1 > 0)) continue;
    double u = d0 / (d0 - d1);
    if (u < 0.05 || u > 0.95) continue;
    double exact = dist(pa, pq);
    NodeDijkstra::Options opt;
    opt.radius_cap = exact * 1.6;
    dj.run_point(P, opt);
    double dg = dj.eval_point(Q, nullptr);
    if (dg >= NodeDijkstra::kInf) continue;
    double rel = dg / exact - 1;
    if (rel > delta_) delta_ = rel;
  }
}

}  // namespace trigonal
