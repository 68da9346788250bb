#include "trigonal/formats.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace trigonal {

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::istream& next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    size_t i = line.find_first_not_of(" \t\r\n");
    if (i == std::string::npos) continue;
    if (line[i] == '#') continue;
    return in;
  }
  return in;
}
}  // namespace

Surface load_off(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line))
    throw FormatError("OFF: empty input");
  {
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "OFF") throw FormatError("OFF: missing header");
  }
  if (!next_content_line(in, line)) throw FormatError("OFF: missing counts");
  long V, F, E;
  {
    std::stringstream ss(line);
    if (!(ss >> V >> F >> E)) throw FormatError("OFF: bad counts line");
  }
  if (V <= 0 || F <= 0) throw FormatError("OFF: non-positive counts");
  std::vector<Vec3> pos((size_t)V);
  for (long i = 0; i < V; ++i) {
    if (!next_content_line(in, line)) throw FormatError("OFF: missing vertex");
    std::stringstream ss(line);
    if (!(ss >> pos[i].x >> pos[i].y >> pos[i].z))
      throw FormatError("OFF: bad vertex line " + std::to_string(i));
  }
  std::vector<Triangle> tris((size_t)F);
  for (long f = 0; f < F; ++f) {
    if (!next_content_line(in, line)) throw FormatError("OFF: missing face");
    std::stringstream ss(line);
    int n, i, j, k;
    if (!(ss >> n >> i >> j >> k) || n != 3)
      throw FormatError("OFF: faces must be triangles (face " +
                        std::to_string(f) + ")");
    if (i < 0 || j < 0 || k < 0 || i >= V || j >= V || k >= V)
      throw FormatError("OFF: face references invalid vertex");
    tris[f].v = {i, j, k};
    tris[f].len = {dist(pos[i], pos[j]), dist(pos[j], pos[k]),
                   dist(pos[k], pos[i])};
  }
  return Surface((int)V, std::move(tris), std::move(pos));
}

void save_off(const Surface& s, std::ostream& out) {
  if (!s.has_positions())
    throw PreconditionError("surface has no extrinsic coordinates for OFF");
  out << "OFF\n" << s.vertex_count() << " " << s.triangle_count() << " 0\n";
  for (const Vec3& p : s.positions())
    out << fmt_double(p.x) << " " << fmt_double(p.y) << " " << fmt_double(p.z)
        << "\n";
  for (int t = 0; t < s.triangle_count(); ++t)
    out << "3 " << s.tri(t).v[0] << " " << s.tri(t).v[1] << " " << s.tri(t).v[2]
        << "\n";
}

Surface load_itri(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw FormatError("ITRI: empty input");
  {
    std::stringstream ss(line);
    std::string tag;
    int ver = 0;
    ss >> tag >> ver;
    if (tag != "ITRI" || ver != 1) throw FormatError("ITRI: bad header");
  }
  std::vector<Triangle> tris;
  int maxv = -1;
  while (next_content_line(in, line)) {
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "t") throw FormatError("ITRI: expected 't' record");
    Triangle t;
    if (!(ss >> t.v[0] >> t.v[1] >> t.v[2] >> t.len[0] >> t.len[1] >> t.len[2]))
      throw FormatError("ITRI: bad triangle record");
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] < 0) throw FormatError("ITRI: negative vertex id");
      maxv = std::max(maxv, t.v[k]);
    }
    tris.push_back(t);
  }
  if (tris.empty()) throw FormatError("ITRI: no triangles");
  return Surface(maxv + 1, std::move(tris), std::nullopt);
}

void save_itri(const Surface& s, std::ostream& out) {
  out << "ITRI 1\n";
  for (int t = 0; t < s.triangle_count(); ++t) {
    const Triangle& tr = s.tri(t);
    out << "t " << tr.v[0] << " " << tr.v[1] << " " << tr.v[2] << " "
        << fmt_double(tr.len[0]) << " " << fmt_double(tr.len[1]) << " "
        << fmt_double(tr.len[2]) << "\n";
  }
}

Surface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".off")
    return load_off(in);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".itri")
    return load_itri(in);
  throw FormatError("unknown surface format (want .off or .itri): " + path);
}

void save_surface(const Surface& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".off") {
    save_off(s, out);
    return;
  }
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".itri") {
    save_itri(s, out);
    return;
  }
  throw FormatError("unknown surface format (want .off or .itri): " + path);
}

void save_net(const Net& net, std::ostream& out) {
  out << "QNET v1\n";
  out << "theta " << fmt_double(net.theta_request) << "\n";
  out << "theta_prime " << fmt_double(net.theta_dense) << "\n";
  out << "theta_sep " << fmt_double(net.theta_sep) << "\n";
  out << "seed " << net.seed << "\n";
  const char* kind = net.kind == NetKind::greedy  ? "greedy"
                     : net.kind == NetKind::dyadic ? "dyadic"
                                                   : "bk";
  out << "kind " << kind << "\n";
  out << "count " << net.points.size() << "\n";
  for (const SurfacePoint& p : net.points)
    out << "t " << p.tri << " " << fmt_double(p.bary[0]) << " "
        << fmt_double(p.bary[1]) << " " << fmt_double(p.bary[2]) << "\n";
}

Net load_net(const Surface& s, std::istream& in) {
  std::string line;
  if (!next_content_line(in, line) || line.rfind("QNET v1", 0) != 0)
    throw FormatError("QNET: bad header");
  Net net;
  size_t count = 0;
  while (next_content_line(in, line)) {
    std::stringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "theta") ss >> net.theta_request;
    else if (key == "theta_prime") ss >> net.theta_dense;
    else if (key == "theta_sep") ss >> net.theta_sep;
    else if (key == "seed") ss >> net.seed;
    else if (key == "kind") {
      std::string k;
      ss >> k;
      net.kind = k == "greedy"  ? NetKind::greedy
                 : k == "dyadic" ? NetKind::dyadic
                 : k == "bk"     ? NetKind::bk
                                 : throw FormatError("QNET: bad kind " + k);
    } else if (key == "count") {
      ss >> count;
    } else if (key == "t") {
      SurfacePoint p;
      if (!(ss >> p.tri >> p.bary[0] >> p.bary[1] >> p.bary[2]))
        throw FormatError("QNET: bad point record");
      if (p.tri < 0 || p.tri >= s.triangle_count())
        throw FormatError("QNET: point references invalid triangle");
      net.points.push_back(p);
      auto n = s.point_node(p);
      net.nodes.push_back(n ? *n : -1);
    } else {
      throw FormatError("QNET: unknown record " + key);
    }
  }
  if (net.points.size() != count)
    throw FormatError("QNET: count mismatch");
  return net;
}

}  // namespace trigonal
