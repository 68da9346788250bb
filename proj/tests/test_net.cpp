#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "trigonal/formats.hpp"
#include "trigonal/net.hpp"

using namespace trigonal;

namespace {

// Brute-force greedy oracle with the Euclidean metric: given the boundary
// chain, grow a maximal theta-separated set over a dense candidate grid.
int greedy_oracle_count(const std::vector<Vec2>& boundary, double theta,
                        int grid) {
  std::vector<Vec2> sel = boundary;
  for (int j = 0; j <= grid; ++j)
    for (int i = 0; i <= grid; ++i) {
      Vec2 c{(double)i / grid, (double)j / grid};
      bool ok = true;
      for (auto& s : sel)
        if (dist(c, s) <= theta) {
          ok = false;
          break;
        }
      if (ok) sel.push_back(c);
    }
  return (int)sel.size();
}

}  // namespace

TEST_CASE("singleton net on a closed surface when theta exceeds the diameter") {
  Surface s = refine(make_flat_torus(1, 1, 8), 2);
  Net net = build_net(s, 2.5, 1);
  CHECK(net.points.size() == 1);
  CHECK(net.theta_dense <= 2.5);
}

TEST_CASE("greedy net on the unit square matches the brute-force oracle") {
  Surface s = refine(make_flat_square(1, 1, 8), 2);
  double theta = 0.5;
  Net net = build_net(s, theta, 3);
  std::vector<Vec2> boundary;
  for (auto& chain : net.boundary_chains)
    for (int i : chain) {
      const auto& p = net.points[i];
      const auto& u = s.uv()[p.tri];
      boundary.push_back(u[0] * p.bary[0] + u[1] * p.bary[1] +
                         u[2] * p.bary[2]);
    }
  int oracle = greedy_oracle_count(boundary, theta, 200);
  CHECK((int)net.points.size() == oracle);

  // exhaustive pairwise separation / density audit in the true (flat) metric
  auto euclid = [&](const SurfacePoint& a, const SurfacePoint& b) {
    const auto& ua = s.uv()[a.tri];
    const auto& ub = s.uv()[b.tri];
    Vec2 pa = ua[0] * a.bary[0] + ua[1] * a.bary[1] + ua[2] * a.bary[2];
    Vec2 pb = ub[0] * b.bary[0] + ub[1] * b.bary[1] + ub[2] * b.bary[2];
    return dist(pa, pb);
  };
  // interior-involving pairs separated by more than theta; boundary-chain
  // neighbors may sit closer (density along loops takes precedence)
  std::set<int> boundary_pts;
  for (auto& chain : net.boundary_chains)
    for (int i : chain) boundary_pts.insert(i);
  double min_sep = 1e9;
  for (size_t i = 0; i < net.points.size(); ++i)
    for (size_t j = i + 1; j < net.points.size(); ++j) {
      double d = euclid(net.points[i], net.points[j]);
      min_sep = std::min(min_sep, d);
      if (!boundary_pts.count((int)i) || !boundary_pts.count((int)j))
        CHECK(d > theta - s.delta() - 1e-9);
    }
  CHECK(net.theta_sep <= min_sep + 1e-9);
  CHECK(min_sep > theta / 2);

  // density over a dense planar grid
  for (int gi = 0; gi <= 40; ++gi)
    for (int gj = 0; gj <= 40; ++gj) {
      Vec2 p{gi / 40.0, gj / 40.0};
      double best = 1e9;
      for (auto& q : net.points) {
        const auto& uq = s.uv()[q.tri];
        Vec2 pq = uq[0] * q.bary[0] + uq[1] * q.bary[1] + uq[2] * q.bary[2];
        best = std::min(best, dist(p, pq));
      }
      CHECK(best <= theta + s.node_density_radius() + 1e-9);
    }
}

TEST_CASE("boundary loops carry a dense chain") {
  Surface s = refine(make_cylinder(1, 2, 16), 2);
  double theta = 0.4;
  Net net = build_net(s, theta, 5);
  REQUIRE(net.boundary_chains.size() == 2);
  double circ = 2 * 16 * std::sin(std::acos(-1.0) / 16);
  for (const auto& chain : net.boundary_chains) {
    CHECK((int)chain.size() >= (int)std::ceil(circ / theta));
    // consecutive arc gaps <= theta (verified via geodesic distance, which
    // can only underestimate the arc gap)
    for (size_t k = 0; k < chain.size(); ++k) {
      const SurfacePoint& a = net.points[chain[k]];
      const SurfacePoint& b = net.points[chain[(k + 1) % chain.size()]];
      CHECK(s.geodesic_distance(a, b) <= theta + 1e-9);
    }
  }
}

TEST_CASE("net determinism") {
  Surface s = refine(make_flat_square(1, 1, 6), 2);
  Net a = build_net(s, 0.3, 42);
  Net b = build_net(s, 0.3, 42);
  REQUIRE(a.points.size() == b.points.size());
  for (size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].tri == b.points[i].tri);
    CHECK(a.points[i].bary == b.points[i].bary);
  }
  Net c = build_net(s, 0.3, 43);
  bool same = a.points.size() == c.points.size();
  if (same)
    for (size_t i = 0; i < a.points.size(); ++i)
      if (a.points[i].tri != c.points[i].tri) same = false;
  CHECK(!same);
}

TEST_CASE("uniformity profile") {
  Surface s = refine(make_flat_square(1, 1, 10), 2);
  double theta = 0.1;
  Net net = build_net(s, theta, 9);
  double sep = net.theta_sep;
  auto profile =
      check_uniformity(s, net, {0.0, sep / 2 * 0.99, 0.2, 0.35, 0.5});
  CHECK(profile[0].second == 1);  // R = 0: the point itself
  CHECK(profile[1].second == 1);  // R < separation/2
  // monotone
  for (size_t i = 1; i < profile.size(); ++i)
    CHECK(profile[i].second >= profile[i - 1].second);
  // packing bound at R=0.35 for a 0.1-separated set (area argument)
  int packing = (int)std::floor(std::pow((2 * 0.35 + 0.1) / 0.1, 2));
  CHECK(profile[3].second <= packing);
  // exhaustive count oracle
  for (double R : {0.2, 0.35}) {
    int expect = 0;
    for (size_t i = 0; i < net.points.size(); ++i) {
      int cnt = 1;
      for (size_t j = 0; j < net.points.size(); ++j)
        if (j != i &&
            s.geodesic_distance(net.points[i], net.points[j]) < R)
          ++cnt;
      expect = std::max(expect, cnt);
    }
    for (auto& [r, n] : profile)
      if (r == R) CHECK(n == expect);
  }
}

TEST_CASE("dyadic net on one patch behaves like an ordinary net") {
  Surface s = refine(make_flat_square(1, 1, 8), 2);
  // Theta/2 > diameter: a single patch suffices
  DyadicBuild db = build_dyadic_net(s, 0.2, 8.0, 7);
  CHECK(db.patches.size() == 1);
  CHECK(db.net.kind == NetKind::dyadic);
  CHECK(db.net.theta_dense <= 0.2 + 1e-12);
}

TEST_CASE("dyadic net partitions into small patches with halving densities") {
  Surface s = refine(make_flat_square(4, 4, 48), 1);
  double theta = 0.2, Theta = 1.0;
  DyadicBuild db = build_dyadic_net(s, theta, Theta, 11);
  CHECK((int)db.patches.size() >= 32);
  // patch diameter audit via in-patch distances
  for (size_t p = 0; p < db.patches.size(); p += std::max<size_t>(1, db.patches.size() / 8)) {
    double diam = s.region_intrinsic_diameter(db.patches[p].tris);
    CHECK(diam < Theta / 2);
  }
  // density audit: every node of patch n within theta/2^n of the net
  NodeDijkstra multi(s);
  multi.run_nodes(db.net.nodes);
  int audited = 0;
  for (auto& patch : db.patches) {
    if (patch.order > 6 || audited > 6) break;
    ++audited;
    int K = s.steiner_per_edge();
    for (int t : patch.tris) {
      for (int c = 0; c < 3; ++c)
        CHECK(multi.dist(s.tri(t).v[c]) <= patch.density * (1 + s.delta()) + 1e-12);
      for (int sd = 0; sd < 3; ++sd) {
        int e = s.tri_edge(t, sd);
        for (int j = 1; j <= K; ++j)
          CHECK(multi.dist(s.vertex_count() + e * K + (j - 1)) <=
                patch.density * (1 + s.delta()) + 1e-12);
      }
    }
  }
  // total added density budget: sum over patches of 2 * theta/2^n <= 4 theta
  double budget = 0;
  for (auto& patch : db.patches) budget += 2 * patch.density;
  CHECK(budget <= 4 * theta + 1e-12);
}

TEST_CASE("bk net densities and counts") {
  // eps = 0: equal-area tiles carry equal counts
  BkBuild b0 = build_bk_net(4, 4, 4.0, 0.0, 1, 3);
  REQUIRE(b0.tiles.size() == 4);
  for (auto& t : b0.tiles) CHECK(t.count == b0.tiles[0].count);

  // depth=1, eps=0.5: dense tiles carry 1.5x the sparse count, within 1
  BkBuild b1 = build_bk_net(4, 4, 4.0, 0.5, 1, 3);
  int dense = 0, sparse = 1 << 28;
  for (auto& t : b1.tiles) {
    dense = std::max(dense, t.count);
    sparse = std::min(sparse, t.count);
  }
  CHECK(std::abs(dense - 1.5 * sparse) <= 1.0 + 1e-9);
  // density-integral oracle per tile
  for (auto& t : b1.tiles)
    CHECK(std::abs(t.count - t.mass) <= 0.5 + 1e-9);

  // uniformity profile finite and monotone
  auto profile = check_uniformity(b1.surface, b1.net, {0.3, 0.6, 1.0});
  for (size_t i = 1; i < profile.size(); ++i) {
    CHECK(profile[i].second >= profile[i - 1].second);
    CHECK(profile[i].second < (int)b1.net.points.size());
  }
}

TEST_CASE("net round-trips through QNET") {
  Surface s = refine(make_flat_square(1, 1, 6), 2);
  Net net = build_net(s, 0.3, 21);
  std::stringstream ss;
  save_net(net, ss);
  Net back = load_net(s, ss);
  REQUIRE(back.points.size() == net.points.size());
  CHECK(back.theta_request == net.theta_request);
  CHECK(back.theta_dense == net.theta_dense);
  CHECK(back.seed == net.seed);
  for (size_t i = 0; i < net.points.size(); ++i) {
    CHECK(back.points[i].tri == net.points[i].tri);
    CHECK(back.points[i].bary == net.points[i].bary);
    CHECK(back.nodes[i] == net.nodes[i]);
  }
}

TEST_CASE("surface file round-trips") {
  Surface s = make_icosphere(1, 1);
  std::stringstream off;
  save_off(s, off);
  Surface s2 = load_off(off);
  CHECK(s2.vertex_count() == s.vertex_count());
  CHECK(s2.triangle_count() == s.triangle_count());
  CHECK(s2.euler_characteristic() == 2);

  std::stringstream itri;
  save_itri(s, itri);
  Surface s3 = load_itri(itri);
  CHECK(s3.vertex_count() == s.vertex_count());
  CHECK(!s3.has_positions());
  CHECK(s3.total_area() == doctest::Approx(s.total_area()));

  // malformed inputs
  std::stringstream bad1("OFF\n4 2 0\n0 0 0\n");
  CHECK_THROWS_AS(load_off(bad1), FormatError);
  std::stringstream bad2("ITRI 1\nt 0 1 2 1 1 3\n");
  CHECK_THROWS_AS(load_itri(bad2), FormatError);

  // unit square as OFF: 4 vertices, 2 triangles, one 4-edge boundary loop
  std::stringstream sq(
      "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n");
  Surface squ = load_off(sq);
  CHECK(squ.vertex_count() == 4);
  CHECK(squ.triangle_count() == 2);
  REQUIRE(squ.boundary_loops().size() == 1);
  CHECK(squ.boundary_loops()[0].size() == 4);
}
