#pragma once

#include <iosfwd>
#include <string>

#include "trigonal/net.hpp"
#include "trigonal/surface.hpp"

namespace trigonal {

// OFF subset: "OFF" / "V F 0" / V lines "x y z" / F lines "3 i j k".
Surface load_off(std::istream& in);
void save_off(const Surface& s, std::ostream& out);

// ITRI v1: "ITRI 1" then lines "t i j k lij ljk lki".
Surface load_itri(std::istream& in);
void save_itri(const Surface& s, std::ostream& out);

// Dispatch on extension (.off / .itri).
Surface load_surface(const std::string& path);
void save_surface(const Surface& s, const std::string& path);

// QNET v1 net files.
void save_net(const Net& net, std::ostream& out);
Net load_net(const Surface& s, std::istream& in);

}  // namespace trigonal
