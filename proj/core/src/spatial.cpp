#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sbg/spatial.hpp"

namespace sbg {

using nlohmann::json;

namespace {

ScanDevice device_from_json(const json& j) {
    ScanDevice d;
    d.label = j.at("label").get<std::string>();
    d.control = j.at("control").get<std::string>();
    if (j.contains("links"))
        for (const auto& l : j.at("links")) d.links.push_back(l.get<std::string>());
    return d;
}

ScanDocument doc_from_json(const json& j) {
    ScanDocument doc;
    doc.label = j.at("label").get<std::string>();
    doc.category = j.at("category").get<std::string>();
    if (j.contains("devices"))
        for (const auto& d : j.at("devices")) doc.devices.push_back(device_from_json(d));
    if (j.contains("children"))
        for (const auto& c : j.at("children")) doc.children.push_back(doc_from_json(c));
    return doc;
}

} // namespace

ScanDocument parse_scan(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(Errc::validation_error, std::string("scan document: ") + e.what());
    }
    try {
        return doc_from_json(j);
    } catch (const json::exception& e) {
        fail(Errc::validation_error, std::string("scan document: ") + e.what());
    }
}

ScanDocument load_scan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::validation_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scan(buf.str());
}

CategoryMap default_category_map() {
    return {{"building", "Building"}, {"floor", "Floor"}, {"room", "Room"}, {"zone", "Zone"}};
}

std::string normalize_label(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c)))
            out += '-';
        else
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    static const std::regex seg("[a-z0-9-]+");
    if (!std::regex_match(out, seg))
        fail(Errc::invalid_label, "label '" + raw + "' does not normalize to [a-z0-9-]+");
    return out;
}

namespace {

struct Ingest {
    const Signature& sig;
    const CategoryMap& mapping;
    Bigraph b;
    std::map<std::string, EdgeId> groups; // link-group id -> closed edge

    NodeId add_node(const std::string& control, const std::string& label,
                    const std::vector<std::string>& links, const Place& parent) {
        auto ctl = sig.find(control);
        if (ctl == sig.end()) fail(Errc::unknown_control, control);
        if (static_cast<int>(links.size()) != ctl->second.arity)
            fail(Errc::arity_mismatch, "device " + label + ": control " + control + " has arity " +
                                           std::to_string(ctl->second.arity) + ", got " +
                                           std::to_string(links.size()) + " links");
        Node n;
        n.id = b.next_node_id++;
        n.control = control;
        n.label = label;
        for (const auto& g : links) {
            auto it = groups.find(g);
            if (it == groups.end()) {
                EdgeId e = b.next_edge_id++;
                b.edges.insert(e);
                it = groups.emplace(g, e).first;
            }
            n.ports.push_back(LinkTarget::to_edge(it->second));
        }
        b.node_parent[n.id] = parent;
        b.nodes[n.id] = std::move(n);
        return b.next_node_id - 1;
    }

    void place(const ScanDocument& doc, const Place& parent) {
        auto ctl = mapping.find(doc.category);
        if (ctl == mapping.end()) fail(Errc::unknown_category, doc.category);
        std::string label = normalize_label(doc.label);
        NodeId id = add_node(ctl->second, label, {}, parent);

        std::set<std::string> sibling_labels;
        auto claim = [&](const std::string& l) {
            if (!sibling_labels.insert(l).second)
                fail(Errc::duplicate_sibling_label, l + " under " + label);
        };
        for (const auto& d : doc.devices) {
            std::string dl = normalize_label(d.label);
            claim(dl);
            add_node(d.control, dl, d.links, Place::at_node(id));
        }
        for (const auto& c : doc.children) {
            claim(normalize_label(c.label));
            place(c, Place::at_node(id));
        }
    }
};

} // namespace

Bigraph ingest_scan(const ScanDocument& doc, const Signature& sig, const CategoryMap& mapping) {
    Ingest ing{sig, mapping, make_empty(sig, 1), {}};
    ing.place(doc, Place::at_root(0));
    return std::move(ing.b);
}

// --- naming ---------------------------------------------------------------

std::string SpatialName::str() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i) out += ".";
        out += segments[i];
    }
    return out;
}

SpatialName SpatialName::parse(const std::string& rendered) {
    static const std::regex seg("[a-z0-9-]+");
    SpatialName n;
    std::string cur;
    for (char c : rendered) {
        if (c == '.') {
            n.segments.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    n.segments.push_back(cur);
    for (const auto& s : n.segments)
        if (!std::regex_match(s, seg))
            fail(Errc::invalid_name, "bad segment '" + s + "' in " + rendered);
    return n;
}

SpatialName spatial_name(const Bigraph& b, NodeId node) {
    SpatialName out;
    NodeId cur = node;
    while (true) {
        const Node& n = b.node(cur);
        if (n.label.empty())
            fail(Errc::missing_label, std::to_string(cur));
        out.segments.push_back(n.label);
        Place p = b.node_parent.at(cur);
        if (p.is_root()) break;
        cur = p.index;
    }
    return out;
}

namespace {

bool name_matches(const Bigraph& b, NodeId node, const SpatialName& name) {
    NodeId cur = node;
    for (std::size_t i = 0; i < name.segments.size(); ++i) {
        const Node& n = b.node(cur);
        if (n.label != name.segments[i]) return false;
        Place p = b.node_parent.at(cur);
        if (i + 1 == name.segments.size()) return p.is_root();
        if (!p.is_node()) return false;
        cur = p.index;
    }
    return false;
}

} // namespace

NodeId resolve(const Bigraph& b, const SpatialName& name) {
    std::vector<NodeId> hits;
    for (const auto& [id, n] : b.nodes) {
        (void)n;
        if (name_matches(b, id, name)) hits.push_back(id);
    }
    if (hits.empty()) fail(Errc::not_found, name.str());
    if (hits.size() > 1) fail(Errc::ambiguous, name.str());
    return hits.front();
}

std::string names_table(const Bigraph& b) {
    std::vector<std::string> lines;
    for (const auto& [id, n] : b.nodes) {
        if (n.label.empty()) continue;
        bool labeled_chain = true;
        NodeId cur = id;
        while (true) {
            if (b.node(cur).label.empty()) {
                labeled_chain = false;
                break;
            }
            Place p = b.node_parent.at(cur);
            if (p.is_root()) break;
            cur = p.index;
        }
        if (!labeled_chain) continue;
        lines.push_back(spatial_name(b, id).str() + "\t" + std::to_string(id));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

// --- scoped views ------------------------------------------------------------

ScopedView extract_scope(const Bigraph& b, NodeId place) {
    const Control& ctl = b.control_of(place);
    if (ctl.atomic) fail(Errc::atomic_scope, std::to_string(place));

    std::vector<NodeId> subtree = b.descendants_of(place);
    std::set<NodeId> inside(subtree.begin(), subtree.end());

    ScopedView sv;
    sv.origin = place;
    Bigraph& v = sv.view;
    v.signature = b.signature;
    v.next_node_id = b.next_node_id;
    v.next_edge_id = b.next_edge_id;

    // Partition links by where their points live.
    std::vector<LinkTarget> order; // boundary assignment order: edges, then names
    for (EdgeId e : b.edges) order.push_back(LinkTarget::to_edge(e));
    for (const auto& y : b.iface.outer_names) order.push_back(LinkTarget::to_outer(y));

    std::map<LinkTarget, LinkTarget> link_rewrite; // original link -> view link
    int bnd = 0;
    for (const auto& link : order) {
        auto pts = b.points_of(link);
        std::size_t in = 0;
        for (auto [id, k] : pts) {
            (void)k;
            if (inside.count(id)) ++in;
        }
        if (in == 0) continue;
        // An outer name is connectable by the context even when every port
        // sits inside, so it always crosses the boundary.
        bool crosses = link.is_outer() || in < pts.size();
        if (crosses) {
            std::string name = "bnd-" + std::to_string(bnd++);
            sv.boundary[name] = link;
            v.iface.outer_names.insert(name);
            link_rewrite[link] = LinkTarget::to_outer(name);
        } else {
            v.edges.insert(link.edge);
            link_rewrite[link] = link;
        }
    }

    for (NodeId id : subtree) {
        Node m = b.node(id);
        for (auto& p : m.ports) p = link_rewrite.at(p);
        v.nodes[id] = std::move(m);
        if (id == place)
            v.node_parent[id] = Place::at_root(0);
        else
            v.node_parent[id] = b.node_parent.at(id);
    }
    return sv;
}

Bigraph reattach(const Bigraph& b, const ScopedView& view) {
    if (!b.has_node(view.origin)) fail(Errc::scope_missing, std::to_string(view.origin));
    ScopedView original = extract_scope(b, view.origin);
    for (const auto& [name, link] : view.boundary) {
        auto it = original.boundary.find(name);
        if (it == original.boundary.end() || !(it->second == link))
            fail(Errc::unknown_boundary_name, name);
    }
    for (const auto& y : view.view.iface.outer_names)
        if (original.boundary.count(y) == 0) fail(Errc::unknown_boundary_name, y);

    Bigraph out = b;
    out.signature = [&] {
        Signature s = out.signature;
        for (const auto& [name, c] : view.view.signature)
            if (!s.count(name)) s.emplace(name, c);
        return s;
    }();

    // Drop the original subtree and the edges wholly inside it.
    std::vector<NodeId> subtree = b.descendants_of(view.origin);
    std::set<NodeId> inside(subtree.begin(), subtree.end());
    Place anchor = b.node_parent.at(view.origin);
    for (NodeId id : subtree) {
        out.nodes.erase(id);
        out.node_parent.erase(id);
    }
    for (EdgeId e : b.edges) {
        auto pts = b.points_of(LinkTarget::to_edge(e));
        if (pts.empty()) continue;
        bool all_in = true;
        for (auto [id, k] : pts) {
            (void)k;
            all_in = all_in && inside.count(id) != 0;
        }
        if (all_in) out.edges.erase(e);
    }

    // Import the view: ids kept unless they collide with surviving context
    // ids; next counters advance monotonically.
    out.next_node_id = std::max(out.next_node_id, view.view.next_node_id);
    out.next_edge_id = std::max(out.next_edge_id, view.view.next_edge_id);
    std::map<NodeId, NodeId> nm;
    for (const auto& [id, n] : view.view.nodes) {
        (void)n;
        nm[id] = out.nodes.count(id) ? out.next_node_id++ : id;
    }
    std::map<EdgeId, EdgeId> em;
    for (EdgeId e : view.view.edges) {
        em[e] = out.edges.count(e) ? out.next_edge_id++ : e;
        out.edges.insert(em[e]);
    }
    auto remap_link = [&](const LinkTarget& t) -> LinkTarget {
        if (t.is_edge()) return LinkTarget::to_edge(em.at(t.edge));
        return view.boundary.at(t.name); // re-fuse to the recorded agent link
    };
    for (const auto& [id, n] : view.view.nodes) {
        Node m = n;
        m.id = nm.at(id);
        for (auto& p : m.ports) p = remap_link(p);
        out.nodes[m.id] = std::move(m);
        Place pp = view.view.node_parent.at(id);
        out.node_parent[m.id] = pp.is_root() ? anchor : Place::at_node(nm.at(pp.index));
    }
    return out;
}

// --- subtree surgery ---------------------------------------------------------

Bigraph insert_tree(const Bigraph& b, NodeId parent, const TreeSpec& tree) {
    Bigraph out = b;
    std::map<std::string, EdgeId> groups;
    auto walk = [&](auto&& self, const TreeSpec& t, const Place& at) -> void {
        auto ctl = out.signature.find(t.control);
        if (ctl == out.signature.end()) fail(Errc::unknown_control, t.control);
        if (static_cast<int>(t.links.size()) != ctl->second.arity)
            fail(Errc::arity_mismatch, t.control + " arity " + std::to_string(ctl->second.arity) +
                                           ", got " + std::to_string(t.links.size()));
        if (!t.children.empty() && ctl->second.atomic)
            fail(Errc::atomic_nesting, t.control);
        Node n;
        n.id = out.next_node_id++;
        n.control = t.control;
        n.label = t.label.empty() ? "" : normalize_label(t.label);
        for (const auto& g : t.links) {
            auto it = groups.find(g);
            if (it == groups.end()) {
                EdgeId e = out.next_edge_id++;
                out.edges.insert(e);
                it = groups.emplace(g, e).first;
            }
            n.ports.push_back(LinkTarget::to_edge(it->second));
        }
        NodeId id = n.id;
        out.node_parent[id] = at;
        out.nodes[id] = std::move(n);
        for (const auto& c : t.children) self(self, c, Place::at_node(id));
    };
    if (!out.has_node(parent)) fail(Errc::not_found, std::to_string(parent));
    walk(walk, tree, Place::at_node(parent));
    return out;
}

Bigraph remove_node(const Bigraph& b, NodeId node) {
    if (!b.has_node(node)) fail(Errc::not_found, std::to_string(node));
    Bigraph out = b;
    for (NodeId d : b.descendants_of(node)) {
        out.nodes.erase(d);
        out.node_parent.erase(d);
    }
    return out;
}

NodeId find_labeled(const Bigraph& b, NodeId scope, const std::string& label) {
    std::vector<NodeId> hits;
    for (NodeId d : b.descendants_of(scope))
        if (b.node(d).label == label) hits.push_back(d);
    if (hits.empty()) fail(Errc::not_found, label);
    if (hits.size() > 1) fail(Errc::ambiguous, label);
    return hits.front();
}

} // namespace sbg
