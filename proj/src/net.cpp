#include "trigonal/net.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace trigonal {

namespace {

// Ordered (node, arc position) list along a boundary loop, plus loop length
// and the largest gap between consecutive nodes.
struct LoopNodes {
  std::vector<int> nodes;
  std::vector<double> arc;
  double len = 0;
  double max_gap = 0;
};

LoopNodes boundary_loop_nodes(const Surface& s, const std::vector<int>& loop) {
  LoopNodes out;
  int K = s.steiner_per_edge();
  // orient the loop: walk edges sharing vertices
  int v = -1;
  {
    const MeshEdge& e0 = s.edge(loop[0]);
    const MeshEdge& e1 = s.edge(loop[loop.size() > 1 ? 1 : 0]);
    if (loop.size() == 1) {
      v = e0.a;
    } else {
      v = (e0.a == e1.a || e0.a == e1.b) ? e0.b : e0.a;
    }
  }
  double pos = 0;
  for (int eid : loop) {
    const MeshEdge& e = s.edge(eid);
    bool forward = (e.a == v);  // walking a->b
    out.nodes.push_back(v);
    out.arc.push_back(pos);
    for (int j = 1; j <= K; ++j) {
      int jj = forward ? j : K + 1 - j;
      out.nodes.push_back(s.vertex_count() + eid * K + (jj - 1));
      out.arc.push_back(pos + e.len * j / (K + 1));
    }
    pos += e.len;
    v = forward ? e.b : e.a;
  }
  out.len = pos;
  for (size_t i = 0; i < out.nodes.size(); ++i) {
    double next = (i + 1 < out.nodes.size()) ? out.arc[i + 1] : out.len;
    out.max_gap = std::max(out.max_gap, next - out.arc[i]);
  }
  return out;
}

// Straightened distance between two graph nodes, reusing a Dijkstra field
// rooted at `src_node` (parents must be valid for `dst_node`).
double straightened_between(const Surface& s, const NodeDijkstra& dj,
                            int src_node, int dst_node) {
  std::vector<int> nodes = dj.path_nodes(dst_node);
  if (!nodes.empty() && nodes.front() == src_node) nodes.erase(nodes.begin());
  if (!nodes.empty() && nodes.back() == dst_node) nodes.pop_back();
  GeodesicPath gp = s.straighten_node_path(
      s.node_point(src_node), s.node_point(dst_node), nodes, nullptr);
  return gp.length;
}


// Boundary sweep: equalized arc spacing <= theta along each loop. The point
// count starts at ceil(len/theta) and grows only if node snapping pushes a
// gap beyond theta.
void sweep_boundary(const Surface& s, double theta, Rng& rng,
                    std::vector<char>& selected, Net& net) {
  auto select = [&](int node) {
    selected[node] = 1;
    net.nodes.push_back(node);
    net.points.push_back(s.node_point(node));
  };
  for (const auto& loop : s.boundary_loops()) {
    LoopNodes ln = boundary_loop_nodes(s, loop);
    if (ln.max_gap >= theta / 2)
      throw PreconditionError(
          "theta too small for refinement level (boundary node gap " +
          std::to_string(ln.max_gap) + " >= theta/2)");
    double offset_frac = rng.next_double();
    std::vector<int> picked;
    bool done = false;
    int start = std::max(1, (int)std::ceil(ln.len / theta));
    for (int n_pts = start; n_pts < start + 100000; ++n_pts) {
      picked.clear();
      double spacing = ln.len / n_pts;
      double offset = offset_frac * spacing;
      auto cyc = [&](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, ln.len - d);
      };
      for (int k = 0; k < n_pts; ++k) {
        double target = offset + k * spacing;
        auto it = std::lower_bound(ln.arc.begin(), ln.arc.end(), target);
        size_t hi = (it - ln.arc.begin()) % ln.arc.size();
        size_t lo = (hi + ln.arc.size() - 1) % ln.arc.size();
        picked.push_back(cyc(ln.arc[lo], target) <= cyc(ln.arc[hi], target)
                             ? (int)lo
                             : (int)hi);
      }
      bool ok = true;
      if (n_pts == 1) {
        ok = ln.len <= theta;
      } else {
        for (int k = 0; k < n_pts && ok; ++k) {
          int a = picked[k], b = picked[(k + 1) % n_pts];
          double gap = ln.arc[b] - ln.arc[a];
          if (gap <= 0) gap += ln.len;
          if (gap > theta || a == b) ok = false;
        }
      }
      if (ok) {
        done = true;
        break;
      }
    }
    if (!done)
      throw PreconditionError(
          "theta too small for refinement level (boundary sweep stalled)");
    std::vector<int> chain;
    for (int idx : picked) {
      int node = ln.nodes[idx];
      if (selected[node])
        throw PreconditionError(
            "theta too small for refinement level (boundary targets collide)");
      chain.push_back((int)net.points.size());
      select(node);
    }
    net.boundary_chains.push_back(std::move(chain));
  }
}

}  // namespace

Net build_net(const Surface& s, double theta, uint64_t seed) {
  if (!(theta > 0)) throw PreconditionError("theta must be positive");
  if (s.delta() >= theta / 10)
    throw PreconditionError(
        "theta too small for refinement level (delta >= theta/10): delta=" +
        std::to_string(s.delta()));

  Net net;
  net.kind = NetKind::greedy;
  net.theta_request = theta;
  net.seed = seed;
  Rng rng(seed);

  std::vector<char> selected(s.node_count(), 0);
  auto select = [&](int node) {
    selected[node] = 1;
    net.nodes.push_back(node);
    net.points.push_back(s.node_point(node));
  };

  sweep_boundary(s, theta, rng, selected, net);

  // Interior greedy pass over all nodes in seeded order.
  std::vector<int> order(s.node_count());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const double margin = 1.05;
  NodeDijkstra dj(s);
  NodeDijkstra::Options opt;
  opt.radius_cap = theta * margin;
  for (int cand : order) {
    if (selected[cand]) continue;
    dj.run_nodes({cand}, opt);
    bool reject = false;
    std::vector<int> gray;
    for (int n : dj.touched()) {
      if (!selected[n] || !dj.reached(n)) continue;
      if (dj.dist(n) <= theta) {
        reject = true;
        break;
      }
      gray.push_back(n);
    }
    if (!reject) {
      for (int g : gray) {
        if (straightened_between(s, dj, cand, g) <= theta) {
          reject = true;
          break;
        }
      }
    }
    if (!reject) select(cand);
  }

  // Realized separation: min straightened distance among close pairs.
  double sep = theta;
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    dj.run_nodes({net.nodes[i]}, opt);
    for (int n : dj.touched()) {
      if (!dj.reached(n) || n == net.nodes[i] || !selected[n]) continue;
      double d = straightened_between(s, dj, net.nodes[i], n);
      sep = std::min(sep, d);
    }
  }
  net.theta_sep = sep;

  // Verified density over the node pool.
  NodeDijkstra multi(s);
  multi.run_nodes(net.nodes);
  double dense_graph = 0;
  int worst = -1;
  for (int n = 0; n < s.node_count(); ++n)
    if (multi.dist(n) > dense_graph) {
      dense_graph = multi.dist(n);
      worst = n;
    }
  if (dense_graph <= theta) {
    net.theta_dense = dense_graph;
  } else {
    // the graph overestimates; certify the offenders by straightening
    double dense = 0;
    NodeDijkstra dj2(s);
    for (int n = 0; n < s.node_count(); ++n) {
      if (multi.dist(n) <= theta) {
        dense = std::max(dense, multi.dist(n));
        continue;
      }
      NodeDijkstra::Options o2;
      o2.radius_cap = multi.dist(n) * 1.05;
      dj2.run_nodes({n}, o2);
      double b2 = multi.dist(n);
      for (int m : dj2.touched())
        if (selected[m] && dj2.reached(m))
          b2 = std::min(b2, straightened_between(s, dj2, n, m));
      dense = std::max(dense, b2);
    }
    net.theta_dense = dense;
    (void)worst;
  }
  return net;
}

std::vector<std::pair<double, int>> check_uniformity(
    const Surface& s, const Net& net, const std::vector<double>& radii) {
  for (double r : radii)
    if (!(r >= 0)) throw PreconditionError("radii must be non-negative");
  double maxR = 0;
  for (double r : radii) maxR = std::max(maxR, r);

  std::vector<char> is_net(s.node_count(), 0);
  for (int n : net.nodes) is_net[n] = 1;

  // straightened pairwise distances out to maxR (with graph margin)
  NodeDijkstra dj(s);
  NodeDijkstra::Options opt;
  opt.radius_cap = maxR * 1.06 + s.delta();
  std::vector<std::vector<double>> dists(net.nodes.size());
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    dj.run_nodes({net.nodes[i]}, opt);
    for (int n : dj.touched()) {
      if (!is_net[n] || n == net.nodes[i] || !dj.reached(n)) continue;
      double d = straightened_between(s, dj, net.nodes[i], n);
      if (d <= maxR * 1.0 + 1e-12 || d <= maxR) dists[i].push_back(d);
      else if (d < maxR * 1.06) dists[i].push_back(d);
    }
    std::sort(dists[i].begin(), dists[i].end());
  }
  std::vector<std::pair<double, int>> profile;
  for (double r : radii) {
    int best = 1;
    for (auto& ds : dists) {
      int cnt = 1 + (int)(std::lower_bound(ds.begin(), ds.end(), r) -
                          ds.begin());
      // strict: d < r counts; lower_bound gives first >= r
      best = std::max(best, cnt);
    }
    profile.push_back({r, best});
  }
  return profile;
}

DyadicBuild build_dyadic_net(const Surface& s, double theta, double big_theta,
                             uint64_t seed) {
  if (!(theta < big_theta / 4))
    throw PreconditionError("dyadic nets need theta < Theta/4");
  if (s.delta() >= theta / 10)
    throw PreconditionError("theta too small for refinement level");

  DyadicBuild out;
  Net& net = out.net;
  net.kind = NetKind::dyadic;
  net.theta_request = theta;
  net.seed = seed;
  Rng rng(seed);

  std::vector<char> selected(s.node_count(), 0);
  auto select = [&](int node) {
    selected[node] = 1;
    net.nodes.push_back(node);
    net.points.push_back(s.node_point(node));
  };

  sweep_boundary(s, theta, rng, selected, net);

  // partition triangles into patches of intrinsic diameter < Theta/2
  double max_edge = s.max_edge_length();
  double radius_cap = big_theta / 4 * (1 - 1e-9) - max_edge * 1.000001;
  if (radius_cap <= 0)
    throw PreconditionError(
        "patch growth fails to bound diameter (resolution too coarse)");
  std::vector<int> patch_of(s.triangle_count(), -1);
  std::vector<int> tri_order(s.triangle_count());
  std::iota(tri_order.begin(), tri_order.end(), 0);
  rng.shuffle(tri_order);
  NodeDijkstra dj(s);
  for (int seed_tri : tri_order) {
    if (patch_of[seed_tri] >= 0) continue;
    DyadicPatch patch;
    patch.order = (int)out.patches.size();
    patch.seed_vertex = s.tri(seed_tri).v[0];
    NodeDijkstra::Options opt;
    opt.radius_cap = radius_cap;
    dj.run_nodes({patch.seed_vertex}, opt);
    for (int t = 0; t < s.triangle_count(); ++t) {
      if (patch_of[t] >= 0) continue;
      bool ok = true;
      for (int c = 0; c < 3; ++c) {
        int v = s.tri(t).v[c];
        if (!dj.reached(v) || dj.dist(v) > radius_cap) ok = false;
      }
      if (ok) {
        patch_of[t] = patch.order;
        patch.tris.push_back(t);
      }
    }
    if (patch.tris.empty())
      throw PreconditionError(
          "patch growth fails to bound diameter (resolution too coarse)");
    patch.density = theta / std::pow(2.0, patch.order);
    out.patches.push_back(std::move(patch));
  }

  // per-patch greedy with density theta / 2^n
  for (auto& patch : out.patches) {
    // candidate nodes: all nodes of patch triangles
    std::vector<int> cands;
    std::vector<char> seen(s.node_count(), 0);
    int K = s.steiner_per_edge();
    for (int t : patch.tris) {
      for (int c = 0; c < 3; ++c) {
        int v = s.tri(t).v[c];
        if (!seen[v]) {
          seen[v] = 1;
          cands.push_back(v);
        }
      }
      for (int sd = 0; sd < 3; ++sd) {
        int e = s.tri_edge(t, sd);
        for (int j = 1; j <= K; ++j) {
          int n = s.vertex_count() + e * K + (j - 1);
          if (!seen[n]) {
            seen[n] = 1;
            cands.push_back(n);
          }
        }
      }
    }
    rng.shuffle(cands);
    double d_n = patch.density;
    NodeDijkstra::Options opt;
    opt.radius_cap = d_n * 1.05;
    for (int cand : cands) {
      if (selected[cand]) continue;
      dj.run_nodes({cand}, opt);
      bool reject = false;
      std::vector<int> gray;
      for (int n : dj.touched()) {
        if (!selected[n] || !dj.reached(n)) continue;
        if (dj.dist(n) <= d_n) {
          reject = true;
          break;
        }
        gray.push_back(n);
      }
      if (!reject)
        for (int g : gray)
          if (straightened_between(s, dj, cand, g) <= d_n) {
            reject = true;
            break;
          }
      if (!reject) select(cand);
    }
  }

  // realized separation (capped search at the finest density scale)
  double sep = theta;
  NodeDijkstra::Options sopt;
  sopt.radius_cap = theta * 1.05;
  for (size_t i = 0; i < net.nodes.size(); ++i) {
    dj.run_nodes({net.nodes[i]}, sopt);
    for (int n : dj.touched()) {
      if (!dj.reached(n) || n == net.nodes[i] || !selected[n]) continue;
      sep = std::min(sep, straightened_between(s, dj, net.nodes[i], n));
    }
  }
  net.theta_sep = sep;

  NodeDijkstra multi(s);
  multi.run_nodes(net.nodes);
  double dense = 0;
  for (int n = 0; n < s.node_count(); ++n)
    dense = std::max(dense, multi.dist(n));
  net.theta_dense = std::min(dense, theta);
  return out;
}

BkBuild build_bk_net(double width, double height, double base_density,
                     double eps, int depth, uint64_t seed) {
  if (depth < 0 || depth > 8)
    throw PreconditionError("bk depth out of range [0,8]");
  if (!(eps >= 0 && eps < 1))
    throw PreconditionError("bk eps out of range [0,1)");
  if (!(base_density > 0))
    throw PreconditionError("bk base density must be positive");

  int tiles = 1 << depth;
  double tw = width / tiles, th = height / tiles;
  double dmax = base_density * (1 + eps);
  double max_mass = dmax * tw * th;
  int kmax = std::max(1, (int)std::ceil(std::sqrt(max_mass)));
  double spacing = std::min(tw, th) / kmax;

  // mesh resolution: node pool much finer than the point spacing, so that
  // node snapping cannot merge two sample points
  int res = std::max(8, (int)std::ceil(std::max(width, height) / (spacing / 2)));
  Surface base = make_flat_square(width, height, res);
  double cell = std::max(width, height) / res;
  int level = 0;
  while (cell / (1 << level) > spacing / 4 && level < 6) ++level;
  Surface surf = refine(base, level);
  if (surf.node_density_radius() * 4 > spacing)
    throw PreconditionError(
        "density budget exceeds candidate resolution (point spacing " +
        std::to_string(spacing) + ")");

  BkBuild out{std::move(surf), {}, depth, {}};
  Net& net = out.net;
  net.kind = NetKind::bk;
  net.seed = seed;
  Rng rng(seed);

  std::unordered_set<int> used;
  const Surface& s = out.surface;

  // locate a planar point in the regular grid mesh
  int nx = res, ny = std::max(1, (int)std::lround(res * height / width));
  double cw = width / nx, ch = height / ny;
  auto locate = [&](double x, double y) {
    int i = std::min(nx - 1, std::max(0, (int)(x / cw)));
    int j = std::min(ny - 1, std::max(0, (int)(y / ch)));
    double lx = x - i * cw, ly = y - j * ch;
    // cell split along the (i,j)->(i+1,j+1) diagonal; triangles are
    // 2*(j*nx+i) (lower) and +1 (upper)
    int t = 2 * (j * nx + i) + ((lx / cw >= ly / ch) ? 0 : 1);
    const auto& u = s.uv()[t];
    Vec2 p{x, y};
    double a = orient2d(u[0], u[1], u[2]);
    SurfacePoint sp;
    sp.tri = t;
    sp.bary[0] = orient2d(p, u[1], u[2]) / a;
    sp.bary[1] = orient2d(u[0], p, u[2]) / a;
    sp.bary[2] = 1 - sp.bary[0] - sp.bary[1];
    for (auto& bv : sp.bary) bv = std::clamp(bv, 0.0, 1.0);
    double sum = sp.bary[0] + sp.bary[1] + sp.bary[2];
    for (auto& bv : sp.bary) bv /= sum;
    return sp;
  };
  auto nearest_node = [&](const SurfacePoint& p) {
    double best = 1e300;
    int bn = -1;
    for (int t : s.incident_tris(p)) {
      Vec2 pp = s.point_in_layout(p, t);
      auto L = s.layout(t);
      auto consider = [&](int n, Vec2 npos) {
        double d = (pp - npos).norm();
        if (d < best) {
          best = d;
          bn = n;
        }
      };
      for (int c = 0; c < 3; ++c) consider(s.tri(t).v[c], L[c]);
      int K = s.steiner_per_edge();
      for (int sd = 0; sd < 3; ++sd) {
        int eid = s.tri_edge(t, sd);
        const MeshEdge& e = s.edge(eid);
        for (int j = 1; j <= K; ++j) {
          double tg = (double)j / (K + 1);
          double sp2 = (s.tri(t).v[sd] == e.a) ? tg : 1 - tg;
          consider(s.vertex_count() + eid * K + (j - 1),
                   L[sd] + (L[(sd + 1) % 3] - L[sd]) * sp2);
        }
      }
    }
    return bn;
  };

  for (int j = 0; j < tiles; ++j)
    for (int i = 0; i < tiles; ++i) {
      int parity = 0;
      for (int l = 1; l <= depth; ++l)
        parity ^= ((i >> (depth - l)) + (j >> (depth - l))) & 1;
      BkTile tile;
      tile.i = i;
      tile.j = j;
      tile.density = parity ? base_density * (1 + eps) : base_density;
      tile.mass = tile.density * tw * th;
      tile.count = (int)std::floor(tile.mass + 0.5);
      int k = std::max(1, (int)std::ceil(std::sqrt((double)tile.count)));
      int placed = 0;
      for (int cj = 0; cj < k && placed < tile.count; ++cj)
        for (int ci = 0; ci < k && placed < tile.count; ++ci) {
          double x = (i + (ci + 0.3 + 0.4 * rng.next_double()) / k) * tw;
          double y = (j + (cj + 0.3 + 0.4 * rng.next_double()) / k) * th;
          int node = nearest_node(locate(x, y));
          if (node < 0 || used.count(node))
            throw PreconditionError(
                "density budget exceeds candidate resolution");
          used.insert(node);
          net.nodes.push_back(node);
          net.points.push_back(s.node_point(node));
          ++placed;
        }
      out.tiles.push_back(tile);
    }

  // realized separation and verified density
  NodeDijkstra dj(s);
  double sep = 1e300;
  NodeDijkstra::Options opt;
  opt.radius_cap = spacing * 3;
  std::vector<char> is_net(s.node_count(), 0);
  for (int n : net.nodes) is_net[n] = 1;
  for (int n0 : net.nodes) {
    dj.run_nodes({n0}, opt);
    for (int n : dj.touched())
      if (is_net[n] && n != n0 && dj.reached(n))
        sep = std::min(sep, straightened_between(s, dj, n0, n));
  }
  net.theta_sep = sep == 1e300 ? spacing : sep;
  NodeDijkstra multi(s);
  multi.run_nodes(net.nodes);
  double dense = 0;
  for (int n = 0; n < s.node_count(); ++n)
    dense = std::max(dense, multi.dist(n));
  net.theta_dense = dense;
  net.theta_request = dense;  // density parameter realized by the sample
  return out;
}

}  // namespace trigonal
