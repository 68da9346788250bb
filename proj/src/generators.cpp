#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "trigonal/surface.hpp"

namespace trigonal {

namespace {
double d3(Vec3 a, Vec3 b) { return (a - b).norm(); }

void check_positive(double v, const char* what) {
  if (!(v > 0)) throw PreconditionError(std::string(what) + " must be positive");
}
}  // namespace

Surface make_flat_square(double w, double h, int res) {
  check_positive(w, "width");
  check_positive(h, "height");
  if (res < 1) throw PreconditionError("resolution must be positive");
  int nx = res;
  int ny = std::max(1, (int)std::lround(res * h / w));
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Vec3> pos((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      pos[vid(i, j)] = {w * i / nx, h * j / ny, 0};
  std::vector<Triangle> tris;
  std::vector<std::array<Vec2, 3>> uv;
  auto add = [&](int a, int b, int c) {
    Triangle t;
    t.v = {a, b, c};
    t.len = {d3(pos[a], pos[b]), d3(pos[b], pos[c]), d3(pos[c], pos[a])};
    tris.push_back(t);
    uv.push_back({Vec2{pos[a].x, pos[a].y}, Vec2{pos[b].x, pos[b].y},
                  Vec2{pos[c].x, pos[c].y}});
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      add(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1));
      add(vid(i, j), vid(i + 1, j + 1), vid(i, j + 1));
    }
  Surface s((nx + 1) * (ny + 1), std::move(tris), std::move(pos));
  s.set_uv(std::move(uv));
  return s;
}

Surface make_flat_torus(double w, double h, int res) {
  check_positive(w, "width");
  check_positive(h, "height");
  if (res < 3) throw PreconditionError("torus resolution must be at least 3");
  int nx = res;
  int ny = std::max(3, (int)std::lround(res * h / w));
  auto vid = [&](int i, int j) { return (j % ny) * nx + (i % nx); };
  double dx = w / nx, dy = h / ny;
  double diag = std::hypot(dx, dy);
  std::vector<Triangle> tris;
  std::vector<std::array<Vec2, 3>> uv;
  auto corner_uv = [&](int i, int j) { return Vec2{dx * i, dy * j}; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Triangle t1;
      t1.v = {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)};
      t1.len = {dx, dy, diag};
      tris.push_back(t1);
      uv.push_back({corner_uv(i, j), corner_uv(i + 1, j), corner_uv(i + 1, j + 1)});
      Triangle t2;
      t2.v = {vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)};
      t2.len = {diag, dx, dy};
      tris.push_back(t2);
      uv.push_back({corner_uv(i, j), corner_uv(i + 1, j + 1), corner_uv(i, j + 1)});
    }
  Surface s(nx * ny, std::move(tris), std::nullopt);
  s.set_uv(std::move(uv));
  return s;
}

Surface make_icosphere(double r, int subdiv) {
  check_positive(r, "radius");
  if (subdiv < 0 || subdiv > 6)
    throw PreconditionError("icosphere subdivision out of range [0,6]");
  double phi = (1 + std::sqrt(5.0)) / 2;
  std::vector<Vec3> pos = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : pos) {
    double n = p.norm();
    p = p * (r / n);
  }
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int lvl = 0; lvl < subdiv; ++lvl) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto k = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(k);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (pos[a] + pos[b]) * 0.5;
      m = m * (r / m.norm());
      pos.push_back(m);
      midpoint[k] = (int)pos.size() - 1;
      return (int)pos.size() - 1;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(faces.size() * 4);
    for (auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      nf.push_back({f[0], ab, ca});
      nf.push_back({f[1], bc, ab});
      nf.push_back({f[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    faces = std::move(nf);
  }
  std::vector<Triangle> tris;
  tris.reserve(faces.size());
  for (auto& f : faces) {
    Triangle t;
    t.v = {f[0], f[1], f[2]};
    t.len = {d3(pos[f[0]], pos[f[1]]), d3(pos[f[1]], pos[f[2]]),
             d3(pos[f[2]], pos[f[0]])};
    tris.push_back(t);
  }
  int nv = (int)pos.size();
  return Surface(nv, std::move(tris), std::move(pos));
}

Surface make_saddle(double a, int res) {
  check_positive(a, "saddle coefficient");
  if (res < 2) throw PreconditionError("saddle resolution must be at least 2");
  int n = res;
  auto vid = [&](int i, int j) { return j * (n + 1) + i; };
  std::vector<Vec3> pos((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      double x = -1 + 2.0 * i / n, y = -1 + 2.0 * j / n;
      pos[vid(i, j)] = {x, y, a * (x * x - y * y)};
    }
  std::vector<Triangle> tris;
  std::vector<std::array<Vec2, 3>> uv;
  auto add = [&](int p, int q, int rr) {
    Triangle t;
    t.v = {p, q, rr};
    t.len = {d3(pos[p], pos[q]), d3(pos[q], pos[rr]), d3(pos[rr], pos[p])};
    tris.push_back(t);
    uv.push_back({Vec2{pos[p].x, pos[p].y}, Vec2{pos[q].x, pos[q].y},
                  Vec2{pos[rr].x, pos[rr].y}});
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      add(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1));
      add(vid(i, j), vid(i + 1, j + 1), vid(i, j + 1));
    }
  Surface s((n + 1) * (n + 1), std::move(tris), std::move(pos));
  s.set_uv(std::move(uv));
  return s;
}

Surface make_cylinder(double r, double h, int res) {
  check_positive(r, "radius");
  check_positive(h, "height");
  if (res < 3) throw PreconditionError("cylinder resolution must be at least 3");
  int na = res;
  double circ = 2 * std::acos(-1.0) * r;
  int nh = std::max(1, (int)std::lround(h / (circ / na)));
  auto vid = [&](int i, int j) { return j * na + (i % na); };
  std::vector<Vec3> pos(na * (nh + 1));
  for (int j = 0; j <= nh; ++j)
    for (int i = 0; i < na; ++i) {
      double ang = 2 * std::acos(-1.0) * i / na;
      pos[vid(i, j)] = {r * std::cos(ang), r * std::sin(ang), h * j / nh};
    }
  std::vector<Triangle> tris;
  std::vector<std::array<Vec2, 3>> uv;
  double du = circ / na;
  auto cuv = [&](int i, int j) { return Vec2{du * i, h * j / nh}; };
  auto add = [&](int p, int q, int rr, Vec2 up, Vec2 uq, Vec2 ur) {
    Triangle t;
    t.v = {p, q, rr};
    t.len = {d3(pos[p], pos[q]), d3(pos[q], pos[rr]), d3(pos[rr], pos[p])};
    tris.push_back(t);
    uv.push_back({up, uq, ur});
  };
  for (int j = 0; j < nh; ++j)
    for (int i = 0; i < na; ++i) {
      add(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), cuv(i, j), cuv(i + 1, j),
          cuv(i + 1, j + 1));
      add(vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), cuv(i, j),
          cuv(i + 1, j + 1), cuv(i, j + 1));
    }
  Surface s(na * (nh + 1), std::move(tris), std::move(pos));
  s.set_uv(std::move(uv));
  return s;
}

Surface generate_builtin(const std::string& spec) {
  auto open = spec.find('(');
  auto close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw FormatError("builtin spec must look like name(arg,...): " + spec);
  std::string name = spec.substr(0, open);
  std::string args = spec.substr(open + 1, close - open - 1);
  std::vector<double> a;
  std::stringstream ss(args);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      a.push_back(std::stod(tok));
    } catch (...) {
      throw FormatError("bad builtin argument: " + tok);
    }
  }
  auto want = [&](size_t n) {
    if (a.size() != n)
      throw FormatError("builtin " + name + " expects " + std::to_string(n) +
                        " arguments");
  };
  if (name == "flat_square") {
    want(3);
    return make_flat_square(a[0], a[1], (int)a[2]);
  }
  if (name == "flat_torus") {
    want(3);
    return make_flat_torus(a[0], a[1], (int)a[2]);
  }
  if (name == "icosphere") {
    want(2);
    return make_icosphere(a[0], (int)a[1]);
  }
  if (name == "saddle") {
    want(2);
    return make_saddle(a[0], (int)a[1]);
  }
  if (name == "cylinder") {
    want(3);
    return make_cylinder(a[0], a[1], (int)a[2]);
  }
  throw FormatError("unknown builtin surface: " + name);
}

Surface refine(const Surface& s, int level) {
  if (level < 0) throw PreconditionError("refinement level must be >= 0");
  int total = s.steiner_level() + level;
  if (total > 8)
    throw PreconditionError("refinement resource guard: total level " +
                            std::to_string(total) + " > 8");
  std::vector<Triangle> tris(s.triangle_count());
  for (int t = 0; t < s.triangle_count(); ++t) tris[t] = s.tri(t);
  std::optional<std::vector<Vec3>> pos;
  if (s.has_positions()) pos = s.positions();
  Surface out(s.vertex_count(), std::move(tris), std::move(pos), total);
  if (s.has_uv()) out.set_uv(s.uv());
  return out;
}

}  // namespace trigonal
