#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbg/bigraph.hpp"

namespace sbg {

// An injective embedding of a redex into a ground agent. Once node_map is
// fixed, site_fill and the link maps are forced by the exactness conditions.
struct Occurrence {
    std::map<NodeId, NodeId> node_map;                 // redex node -> agent node
    std::map<int, std::vector<NodeId>> site_fill;      // redex site -> parameter roots
    std::map<EdgeId, EdgeId> edge_map;                 // redex closed edge -> agent edge
    std::map<std::string, LinkTarget> name_map;        // redex outer name -> agent link
    std::map<std::int64_t, Place> region_place;        // redex root -> agent place

    // Canonical sort key: node_map images in ascending redex-id order.
    std::vector<NodeId> image_key() const;
    std::string summary() const;
};

// Throws RedexNotSolid naming the violated restriction. Solidity: every
// redex root holds at least one node, no site is a root, and no two sites
// share a parent.
void require_solid(const Bigraph& redex);

// All occurrences of redex in a ground, valid agent, in canonical order
// (ascending image_key). Anchored backtracking search.
std::vector<Occurrence> find_occurrences(const Bigraph& agent, const Bigraph& redex);

std::size_t count_occurrences(const Bigraph& agent, const Bigraph& redex);

// Independent test oracle: enumerate every injective control-preserving node
// map and keep those that satisfy the occurrence conditions checked directly
// from their definitions. Agents above 10 nodes are rejected (SizeLimit).
std::vector<Occurrence> oracle_occurrences(const Bigraph& agent, const Bigraph& redex);

// Definition-level validity check for one candidate node map; returns the
// fully derived occurrence when every condition holds. Shared by the oracle
// and by StaleOccurrence detection, not by the search path.
std::optional<Occurrence> derive_occurrence(const Bigraph& agent, const Bigraph& redex,
                                            const std::map<NodeId, NodeId>& node_map);

} // namespace sbg
