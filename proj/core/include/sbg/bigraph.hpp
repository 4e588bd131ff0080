#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sbg/errors.hpp"

namespace sbg {

using NodeId = std::int64_t;
using EdgeId = std::int64_t;

// A node type: fixes the port count and whether the node may contain children.
struct Control {
    std::string name;
    int arity = 0;
    bool atomic = false;

    friend bool operator==(const Control&, const Control&) = default;
};

// Control name -> Control; names are unique by construction.
using Signature = std::map<std::string, Control>;

// Where a port (or an inner name) connects: a closed hyperedge or an open
// link terminating in an outer name.
struct LinkTarget {
    enum class Kind { edge, outer };
    Kind kind = Kind::edge;
    EdgeId edge = -1;
    std::string name;

    static LinkTarget to_edge(EdgeId e) { return LinkTarget{Kind::edge, e, {}}; }
    static LinkTarget to_outer(std::string n) { return LinkTarget{Kind::outer, -1, std::move(n)}; }

    bool is_edge() const { return kind == Kind::edge; }
    bool is_outer() const { return kind == Kind::outer; }

    friend bool operator==(const LinkTarget&, const LinkTarget&) = default;
    friend auto operator<=>(const LinkTarget&, const LinkTarget&) = default;
};

struct Node {
    NodeId id = -1;
    std::string control;
    std::string label;                // optional human name, "" = none
    std::vector<LinkTarget> ports;    // length == control arity
};

// Parent of a node or a site: another node, or a root (region) index.
struct Place {
    enum class Kind { node, root };
    Kind kind = Kind::root;
    std::int64_t index = 0;

    static Place at_node(NodeId n) { return Place{Kind::node, n}; }
    static Place at_root(std::int64_t r) { return Place{Kind::root, r}; }

    bool is_node() const { return kind == Kind::node; }
    bool is_root() const { return kind == Kind::root; }

    friend bool operator==(const Place&, const Place&) = default;
    friend auto operator<=>(const Place&, const Place&) = default;
};

// <sites, inner names> -> <roots, outer names>
struct Interface {
    int sites = 0;
    std::set<std::string> inner_names;
    int roots = 1;
    std::set<std::string> outer_names;

    friend bool operator==(const Interface&, const Interface&) = default;
};

struct Violation {
    std::string rule;      // short invariant name, e.g. "arity mismatch"
    std::string subject;   // offending id, rendered
    std::string detail;
};

using ValidationReport = std::vector<Violation>;

// The world representation: a rooted-forest place structure and a hypergraph
// link structure over one set of typed nodes.
//
// Values are treated as immutable once built; every operation returns a new
// value. Fields are public so tests can assemble raw (possibly invalid)
// structures and feed them to validate().
struct Bigraph {
    Signature signature;
    std::map<NodeId, Node> nodes;
    std::map<NodeId, Place> node_parent;
    std::map<int, Place> site_parent;       // site index -> place
    Interface iface;
    std::set<EdgeId> edges;
    std::map<std::string, LinkTarget> inner_links; // inner name -> link
    NodeId next_node_id = 0;
    EdgeId next_edge_id = 0;

    bool is_ground() const { return iface.sites == 0 && iface.inner_names.empty(); }

    const Node& node(NodeId id) const;
    const Control& control_of(NodeId id) const;
    bool has_node(NodeId id) const { return nodes.count(id) != 0; }

    // Children (node ids) of a place, ascending.
    std::vector<NodeId> children_of(const Place& p) const;
    // Site indices parented at a place, ascending.
    std::vector<int> sites_of(const Place& p) const;
    // Node plus all place-graph descendants, ascending.
    std::vector<NodeId> descendants_of(NodeId id) const;
    // Root region a node ultimately sits under.
    std::int64_t root_of(NodeId id) const;

    // All (node, port index) pairs attached to a link, ascending.
    std::vector<std::pair<NodeId, int>> points_of(const LinkTarget& link) const;
    // Inner names wired to a link, ascending.
    std::vector<std::string> inner_points_of(const LinkTarget& link) const;
};

// --- construction helpers -------------------------------------------------

// 0 nodes, `roots` empty regions.
Bigraph make_empty(const Signature& sig, int roots = 1);

// Prime bigraph holding one node; ports wired to the given outer names.
Bigraph make_node_bigraph(const Signature& sig, const std::string& control,
                          const std::vector<std::string>& port_names = {},
                          const std::string& label = "");

// Prime bigraph that is a single site under its root (the "hole").
Bigraph make_hole(const Signature& sig);

// Identity context over <n, names>: n roots each holding the matching site,
// every name passed through.
Bigraph make_identity(const Signature& sig, int roots, const std::set<std::string>& names);

// --- operations -------------------------------------------------------------

ValidationReport validate(const Bigraph& b);

// Categorical composition: inner's roots plug into outer's sites index by
// index, inner's outer names fuse with outer's equally-named inner names.
// Node and edge ids are freshly renumbered.
Bigraph compose(const Bigraph& outer, const Bigraph& inner);

// Parallel product: regions concatenated (a's first), shared outer names fused.
Bigraph juxtapose(const Bigraph& a, const Bigraph& b);

// DSL elaboration helper: replace parent_expr's single hole with the merged
// root contents of the given prime children.
Bigraph merge_under(const Bigraph& parent_expr, const std::vector<Bigraph>& children);

// Closure /x: all points on outer name x move to one fresh closed edge.
Bigraph close_name(const Bigraph& b, const std::string& x);

// Structural equality up to node/edge renaming; interface indices, outer
// names and labels are rigid. Backtracking search, intended for small values.
bool iso_eq(const Bigraph& a, const Bigraph& b);

// Copy with node ids remapped to first_id, first_id+1, ... in ascending
// order of the original ids. Link and place structure preserved.
Bigraph renumber(const Bigraph& b, NodeId first_id);

} // namespace sbg
