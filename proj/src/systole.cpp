#include <algorithm>
#include <cmath>
#include <queue>

#include "trigonal/surface.hpp"

namespace trigonal {

// Shortest cycle of the mesh edge graph that is nontrivial in first homology
// (Z/2 coefficients), via tree-cotree cocycles and per-vertex shortest-path
// trees. Returns graph length * (1 - delta) as the documented lower bound.
std::optional<double> Surface::systole_lower_bound() const {
  int b = (int)boundary_loops_.size();
  int chi = euler_characteristic();
  int rank = (2 - chi - b) + std::max(0, b - 1);
  if (rank <= 0) return std::nullopt;  // trivial first homology
  if (rank > 30) throw PreconditionError("first homology rank too large");

  int V = vertex_count_;
  int E = (int)edges_.size();

  // adjacency over mesh edges
  std::vector<std::vector<std::pair<int, int>>> adj(V);  // (other, edge id)
  for (int e = 0; e < E; ++e) {
    adj[edges_[e].a].push_back({edges_[e].b, e});
    adj[edges_[e].b].push_back({edges_[e].a, e});
  }

  // primal spanning tree (BFS)
  std::vector<char> in_tree(E, 0);
  {
    std::vector<char> vis(V, 0);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [w, e] : adj[u])
        if (!vis[w]) {
          vis[w] = 1;
          in_tree[e] = 1;
          q.push(w);
        }
    }
  }

  // dual forest over faces plus a single virtual node coning off the
  // boundary (leftover count is then exactly the first homology rank)
  int D = triangle_count() + (b > 0 ? 1 : 0);
  auto dual_ends = [&](int e) {
    int d0 = edges_[e].tri[0];
    int d1 = edges_[e].boundary() ? triangle_count() : edges_[e].tri[1];
    return std::make_pair(d0, d1);
  };
  std::vector<int> dparent(D, -1), dparent_edge(D, -1), drank(D, 0), droot(D);
  for (int i = 0; i < D; ++i) droot[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (droot[x] != x) {
      droot[x] = droot[droot[x]];
      x = droot[x];
    }
    return x;
  };
  // build dual forest with explicit parent pointers via BFS-like union
  std::vector<std::vector<std::pair<int, int>>> dadj(D);
  std::vector<int> leftover;
  for (int e = 0; e < E; ++e) {
    if (in_tree[e]) continue;
    auto [d0, d1] = dual_ends(e);
    int r0 = find(d0), r1 = find(d1);
    if (r0 != r1) {
      droot[r0] = r1;
      dadj[d0].push_back({d1, e});
      dadj[d1].push_back({d0, e});
    } else {
      leftover.push_back(e);
    }
  }
  if ((int)leftover.size() != rank)
    throw std::logic_error("tree-cotree rank mismatch: got " +
                           std::to_string(leftover.size()) + " expected " +
                           std::to_string(rank));

  // parents in the dual forest (BFS per component)
  {
    std::vector<char> vis(D, 0);
    for (int s0 = 0; s0 < D; ++s0) {
      if (vis[s0]) continue;
      std::queue<int> q;
      q.push(s0);
      vis[s0] = 1;
      dparent[s0] = -1;
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [w, e] : dadj[u])
          if (!vis[w]) {
            vis[w] = 1;
            dparent[w] = u;
            dparent_edge[w] = e;
            q.push(w);
          }
      }
    }
  }

  // cocycle signatures: bit i set on primal edges crossed by the dual cycle
  // of leftover edge i
  std::vector<uint32_t> sig(E, 0);
  std::vector<int> depth(D, 0);
  {
    std::function<int(int)> dep = [&](int x) -> int {
      if (dparent[x] < 0) return 0;
      if (depth[x] > 0) return depth[x];
      depth[x] = dep(dparent[x]) + 1;
      return depth[x];
    };
    for (int i = 0; i < (int)leftover.size(); ++i) {
      int e = leftover[i];
      sig[e] ^= (1u << i);
      auto [x, y] = dual_ends(e);
      int dx = dep(x), dy = dep(y);
      while (dx > dy) {
        sig[dparent_edge[x]] ^= (1u << i);
        x = dparent[x];
        --dx;
      }
      while (dy > dx) {
        sig[dparent_edge[y]] ^= (1u << i);
        y = dparent[y];
        --dy;
      }
      while (x != y) {
        sig[dparent_edge[x]] ^= (1u << i);
        sig[dparent_edge[y]] ^= (1u << i);
        x = dparent[x];
        y = dparent[y];
      }
    }
  }

  // per-vertex Dijkstra; candidate cycles from non-tree edges
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> dist(V);
  std::vector<uint32_t> vsig(V);
  std::vector<char> done(V);
  using QE = std::pair<double, int>;
  for (int src = 0; src < V; ++src) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(vsig.begin(), vsig.end(), 0u);
    std::fill(done.begin(), done.end(), 0);
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (done[u] || d > dist[u]) continue;
      done[u] = 1;
      if (2 * d > best) break;  // no shorter cycle through src remains
      for (auto [w, e] : adj[u]) {
        double nd = d + edges_[e].len;
        if (nd < dist[w]) {
          dist[w] = nd;
          vsig[w] = vsig[u] ^ sig[e];
          pq.push({nd, w});
        }
      }
    }
    for (int e = 0; e < E; ++e) {
      int x = edges_[e].a, y = edges_[e].b;
      if (!done[x] || !done[y]) continue;
      uint32_t cyc = vsig[x] ^ vsig[y] ^ sig[e];
      if (cyc == 0) continue;
      best = std::min(best, dist[x] + dist[y] + edges_[e].len);
    }
  }
  return best * (1 - delta_);
}

}  // namespace trigonal
