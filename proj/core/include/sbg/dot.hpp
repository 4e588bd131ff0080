#pragma once

#include <string>

#include "sbg/bigraph.hpp"

namespace sbg {

// Graphviz rendering: solid containment clusters for the place graph,
// dashed hyperedges through fan-out points for the link graph.
std::string export_dot(const Bigraph& b);

} // namespace sbg
