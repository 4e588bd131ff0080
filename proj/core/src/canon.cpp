#include "sbg/canon.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include <json.hpp>

#include "sbg/digest.hpp"

namespace sbg {

namespace {

using nlohmann::json;

// Structural hash of a subtree, independent of node/edge ids. Edge identity
// is deliberately blurred ("e") so sibling ordering cannot depend on
// construction history.
std::string subtree_hash(const Bigraph& b, NodeId id,
                         std::map<NodeId, std::string>& memo) {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const Node& n = b.node(id);
    std::string desc = n.control + "|" + n.label + "|";
    for (const auto& p : n.ports)
        desc += p.is_outer() ? "o:" + p.name + ";" : "e;";
    std::vector<std::string> kids;
    for (NodeId c : b.children_of(Place::at_node(id)))
        kids.push_back(subtree_hash(b, c, memo));
    for (int s : b.sites_of(Place::at_node(id)))
        kids.push_back("site:" + std::to_string(s));
    std::sort(kids.begin(), kids.end());
    desc += "(";
    for (const auto& k : kids) desc += k + ",";
    desc += ")";
    std::string h = sha256_hex(desc);
    memo[id] = h;
    return h;
}

} // namespace

Bigraph canonical_form(const Bigraph& b) {
    std::map<NodeId, std::string> memo;
    std::map<NodeId, NodeId> nm;
    NodeId next = 0;
    std::function<void(const Place&)> assign = [&](const Place& p) {
        std::vector<NodeId> kids = b.children_of(p);
        std::stable_sort(kids.begin(), kids.end(), [&](NodeId x, NodeId y) {
            return subtree_hash(b, x, memo) < subtree_hash(b, y, memo);
        });
        for (NodeId c : kids) {
            nm[c] = next++;
            assign(Place::at_node(c));
        }
    };
    for (int r = 0; r < b.iface.roots; ++r) assign(Place::at_root(r));
    // Nodes unreachable from a root (invalid inputs) keep a stable order.
    for (const auto& [id, n] : b.nodes) {
        (void)n;
        if (nm.count(id) == 0) nm[id] = next++;
    }

    // Edges ordered by their first canonical point; idle edges trail.
    std::vector<std::pair<std::vector<std::pair<NodeId, int>>, EdgeId>> keyed;
    for (EdgeId e : b.edges) {
        std::vector<std::pair<NodeId, int>> pts;
        for (auto [nid, k] : b.points_of(LinkTarget::to_edge(e)))
            pts.emplace_back(nm.at(nid), k);
        std::sort(pts.begin(), pts.end());
        if (pts.empty()) pts.emplace_back(std::numeric_limits<NodeId>::max(), static_cast<int>(e));
        keyed.emplace_back(std::move(pts), e);
    }
    std::sort(keyed.begin(), keyed.end());
    std::map<EdgeId, EdgeId> em;
    EdgeId enext = 0;
    for (const auto& [key, e] : keyed) {
        (void)key;
        em[e] = enext++;
    }

    Bigraph out;
    out.signature = b.signature;
    out.iface = b.iface;
    out.next_node_id = next;
    out.next_edge_id = enext;
    for (EdgeId e = 0; e < enext; ++e) out.edges.insert(e);
    auto remap_target = [&](const LinkTarget& t) {
        return t.is_edge() ? LinkTarget::to_edge(em.at(t.edge)) : t;
    };
    auto remap_place = [&](const Place& p) {
        return p.is_node() ? Place::at_node(nm.at(p.index)) : p;
    };
    for (const auto& [id, n] : b.nodes) {
        Node m = n;
        m.id = nm.at(id);
        for (auto& p : m.ports) p = remap_target(p);
        out.nodes[m.id] = std::move(m);
    }
    for (const auto& [id, parent] : b.node_parent) out.node_parent[nm.at(id)] = remap_place(parent);
    for (const auto& [s, parent] : b.site_parent) out.site_parent[s] = remap_place(parent);
    for (const auto& [x, tgt] : b.inner_links) out.inner_links[x] = remap_target(tgt);
    return out;
}

std::string canonical_json(const Bigraph& b) {
    Bigraph c = canonical_form(b);
    json doc;

    json sig = json::array();
    for (const auto& [name, ctl] : c.signature) {
        (void)name;
        sig.push_back({{"arity", ctl.arity}, {"atomic", ctl.atomic}, {"name", ctl.name}});
    }
    doc["signature"] = std::move(sig);

    auto show_target = [](const LinkTarget& t) {
        return t.is_edge() ? "edge:" + std::to_string(t.edge) : "name:" + t.name;
    };
    json nodes = json::array();
    for (const auto& [id, n] : c.nodes) {
        json ports = json::array();
        for (const auto& p : n.ports) ports.push_back(show_target(p));
        json jn = {{"control", n.control}, {"id", id}, {"ports", std::move(ports)}};
        if (n.label.empty())
            jn["label"] = nullptr;
        else
            jn["label"] = n.label;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    auto show_place = [](const Place& p) {
        return (p.is_node() ? "node:" : "root:") + std::to_string(p.index);
    };
    json parents = json::object();
    for (const auto& [id, parent] : c.node_parent)
        parents["node:" + std::to_string(id)] = show_place(parent);
    for (const auto& [s, parent] : c.site_parent)
        parents["site:" + std::to_string(s)] = show_place(parent);
    doc["parents"] = std::move(parents);

    doc["interface"] = {{"sites", c.iface.sites},
                        {"inner_names", c.iface.inner_names},
                        {"roots", c.iface.roots},
                        {"outer_names", c.iface.outer_names}};
    doc["edges"] = c.edges;
    json il = json::object();
    for (const auto& [x, tgt] : c.inner_links) il[x] = show_target(tgt);
    doc["inner_links"] = std::move(il);

    return doc.dump();
}

std::string canonical_hash(const Bigraph& b) {
    return sha256_hex(canonical_json(b));
}

} // namespace sbg
