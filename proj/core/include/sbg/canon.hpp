#pragma once

#include <string>

#include "sbg/bigraph.hpp"

namespace sbg {

// Copy with node and edge ids renumbered along a canonical traversal:
// roots in index order, children ordered by structural subtree hash, edges
// by their first canonical point. Place-graph children stay formally
// unordered; this is only a stable presentation for hashing and display.
Bigraph canonical_form(const Bigraph& b);

// Deterministic JSON document (sorted keys, canonical child order) for the
// canonical form. Byte-stable across runs for equal constructions.
std::string canonical_json(const Bigraph& b);

// SHA-256 of canonical_json, lowercase hex.
std::string canonical_hash(const Bigraph& b);

} // namespace sbg
