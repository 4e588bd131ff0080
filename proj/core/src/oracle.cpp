#include <algorithm>
#include <set>

#include "sbg/match.hpp"

// Brute-force occurrence enumeration, kept deliberately independent of the
// search in match.cpp: every condition below is transcribed from the
// occurrence definition and checked on a complete candidate map.

namespace sbg {

std::optional<Occurrence> derive_occurrence(const Bigraph& agent, const Bigraph& redex,
                                            const std::map<NodeId, NodeId>& node_map) {
    if (node_map.size() != redex.nodes.size()) return std::nullopt;
    std::set<NodeId> used;
    for (const auto& [u, v] : node_map) {
        if (!redex.has_node(u) || !agent.has_node(v)) return std::nullopt;
        if (!used.insert(v).second) return std::nullopt; // injectivity
        const Node& ru = redex.node(u);
        const Node& av = agent.node(v);
        if (ru.control != av.control) return std::nullopt;
        if (!ru.label.empty() && ru.label != av.label) return std::nullopt;
    }

    Occurrence occ;
    occ.node_map = node_map;

    // Parent structure: redex child-of implies agent child-of; all top nodes
    // of one redex region sit under one common agent place.
    for (const auto& [u, v] : node_map) {
        Place pu = redex.node_parent.at(u);
        Place pv = agent.node_parent.at(v);
        if (pu.is_node()) {
            if (!pv.is_node()) return std::nullopt;
            if (node_map.at(pu.index) != pv.index) return std::nullopt;
        } else {
            auto it = occ.region_place.find(pu.index);
            if (it == occ.region_place.end())
                occ.region_place[pu.index] = pv;
            else if (it->second != pv)
                return std::nullopt;
        }
    }

    // Exactness: a redex node without a site child covers the image's
    // children completely; with a site child, leftovers fill the site.
    for (const auto& [u, v] : node_map) {
        std::vector<NodeId> agent_children = agent.children_of(Place::at_node(v));
        std::set<NodeId> covered;
        for (NodeId c : redex.children_of(Place::at_node(u))) covered.insert(node_map.at(c));
        std::vector<int> sites = redex.sites_of(Place::at_node(u));
        std::vector<NodeId> leftover;
        for (NodeId c : agent_children)
            if (covered.count(c) == 0) leftover.push_back(c);
        if (sites.empty()) {
            if (!leftover.empty()) return std::nullopt;
        } else {
            occ.site_fill[sites.front()] = leftover; // solidity: one site per parent
        }
    }
    for (int s = 0; s < redex.iface.sites; ++s)
        if (occ.site_fill.count(s) == 0) occ.site_fill[s] = {};

    // Closed-edge exactness: a redex edge maps onto an agent edge whose point
    // set is exactly the image of the redex edge's points.
    for (EdgeId e : redex.edges) {
        auto pts = redex.points_of(LinkTarget::to_edge(e));
        std::vector<std::pair<NodeId, int>> expected;
        std::optional<EdgeId> target;
        for (auto [u, k] : pts) {
            const LinkTarget& t = agent.node(node_map.at(u)).ports.at(k);
            if (!t.is_edge()) return std::nullopt;
            if (target && *target != t.edge) return std::nullopt;
            target = t.edge;
            expected.emplace_back(node_map.at(u), k);
        }
        if (!target) continue; // idle redex edge constrains nothing
        std::sort(expected.begin(), expected.end());
        if (agent.points_of(LinkTarget::to_edge(*target)) != expected) return std::nullopt;
        occ.edge_map[e] = *target;
    }

    // Open-link compatibility: all redex ports on one outer name land on one
    // common agent link.
    for (const auto& y : redex.iface.outer_names) {
        auto pts = redex.points_of(LinkTarget::to_outer(y));
        std::optional<LinkTarget> target;
        for (auto [u, k] : pts) {
            const LinkTarget& t = agent.node(node_map.at(u)).ports.at(k);
            if (target && !(*target == t)) return std::nullopt;
            target = t;
        }
        if (target) occ.name_map[y] = *target;
    }

    // The decomposition must be clean: parameters and images disjoint, and
    // every region plugs into context territory, not into the occurrence.
    std::set<NodeId> images(used.begin(), used.end());
    std::set<NodeId> params;
    for (const auto& [s, roots] : occ.site_fill) {
        (void)s;
        for (NodeId r : roots)
            for (NodeId d : agent.descendants_of(r)) params.insert(d);
    }
    for (NodeId p : params)
        if (images.count(p)) return std::nullopt;
    for (const auto& [r, place] : occ.region_place) {
        (void)r;
        if (place.is_node() && (images.count(place.index) || params.count(place.index)))
            return std::nullopt;
    }
    return occ;
}

namespace {

void enumerate_maps(const Bigraph& agent, const Bigraph& redex,
                    const std::vector<NodeId>& redex_nodes, std::size_t depth,
                    std::map<NodeId, NodeId>& partial, std::set<NodeId>& taken,
                    std::vector<Occurrence>& out) {
    if (depth == redex_nodes.size()) {
        if (auto occ = derive_occurrence(agent, redex, partial)) out.push_back(std::move(*occ));
        return;
    }
    NodeId u = redex_nodes[depth];
    const Node& ru = redex.node(u);
    for (const auto& [v, av] : agent.nodes) {
        if (taken.count(v)) continue;
        if (av.control != ru.control) continue;
        partial[u] = v;
        taken.insert(v);
        enumerate_maps(agent, redex, redex_nodes, depth + 1, partial, taken, out);
        partial.erase(u);
        taken.erase(v);
    }
}

} // namespace

std::vector<Occurrence> oracle_occurrences(const Bigraph& agent, const Bigraph& redex) {
    if (agent.nodes.size() > 10)
        fail(Errc::size_limit, "oracle limited to 10 agent nodes, got " +
                                   std::to_string(agent.nodes.size()));
    require_solid(redex);
    std::vector<NodeId> redex_nodes;
    for (const auto& [id, n] : redex.nodes) {
        (void)n;
        redex_nodes.push_back(id);
    }
    std::vector<Occurrence> out;
    std::map<NodeId, NodeId> partial;
    std::set<NodeId> taken;
    enumerate_maps(agent, redex, redex_nodes, 0, partial, taken, out);
    std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
        return a.image_key() < b.image_key();
    });
    return out;
}

} // namespace sbg
