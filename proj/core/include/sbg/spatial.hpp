#pragma once

#include <map>
#include <string>
#include <vector>

#include "sbg/bigraph.hpp"

namespace sbg {

// One entry of a scan document: a place in the hierarchy, the devices it
// holds, and nested places. Parsed from JSON.
struct ScanDevice {
    std::string label;
    std::string control;
    std::vector<std::string> links; // link-group ids; one closed edge per id
};

struct ScanDocument {
    std::string label;
    std::string category; // building | floor | room | zone
    std::vector<ScanDevice> devices;
    std::vector<ScanDocument> children;
};

ScanDocument parse_scan(const std::string& json_text);
ScanDocument load_scan(const std::string& path);

// category -> control name; the default capitalizes the four categories.
using CategoryMap = std::map<std::string, std::string>;
CategoryMap default_category_map();

// Lowercase, whitespace to '-'; rejects anything that then fails
// [a-z0-9-]+.
std::string normalize_label(const std::string& raw);

// One place node per tree entry, one device node per device; devices
// sharing a link-group id share one closed edge. Single root.
Bigraph ingest_scan(const ScanDocument& doc, const Signature& sig,
                    const CategoryMap& mapping = default_category_map());

// Dot-joined containment path, leaf first: "projector.room-a.floor-1.building-1".
struct SpatialName {
    std::vector<std::string> segments; // leaf first

    std::string str() const;
    static SpatialName parse(const std::string& rendered);

    friend bool operator==(const SpatialName&, const SpatialName&) = default;
};

SpatialName spatial_name(const Bigraph& b, NodeId node);
NodeId resolve(const Bigraph& b, const SpatialName& name);
inline NodeId resolve(const Bigraph& b, const std::string& name) {
    return resolve(b, SpatialName::parse(name));
}

// `name<TAB>node-id` per labeled node with a fully labeled ancestor chain,
// sorted by name. Shared by the CLI and tests.
std::string names_table(const Bigraph& b);

// A place-rooted ground view: the scope node and its full subtree. Links
// crossing the boundary surface as bnd-<k> outer names; the boundary map
// remembers the original link each one stood for.
struct ScopedView {
    Bigraph view;
    std::map<std::string, LinkTarget> boundary; // bnd-k -> original agent link
    NodeId origin = -1;
};

ScopedView extract_scope(const Bigraph& b, NodeId place);

// Replace the origin subtree with the (possibly rewritten) view contents;
// boundary names re-fuse to their recorded links, dropped ones disconnect.
Bigraph reattach(const Bigraph& b, const ScopedView& view);

// Free-form subtree insertions/removals used by scenario events and tests.
struct TreeSpec {
    std::string control;
    std::string label;
    std::vector<std::string> links; // link-group ids local to one insertion
    std::vector<TreeSpec> children;
};

Bigraph insert_tree(const Bigraph& b, NodeId parent, const TreeSpec& tree);
Bigraph remove_node(const Bigraph& b, NodeId node);
// Unique node with the given label inside (and including) the scope subtree.
NodeId find_labeled(const Bigraph& b, NodeId scope, const std::string& label);

} // namespace sbg
