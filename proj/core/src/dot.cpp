#include <sstream>

#include "sbg/canon.hpp"
#include "sbg/dot.hpp"

namespace sbg {

namespace {

std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

void emit_place(std::ostream& os, const Bigraph& b, NodeId id, int depth) {
    const Node& n = b.node(id);
    std::string title = n.control;
    if (!n.label.empty()) title += "\\n" + n.label;
    auto kids = b.children_of(Place::at_node(id));
    auto sites = b.sites_of(Place::at_node(id));
    if (kids.empty() && sites.empty()) {
        os << indent(depth) << "n" << id << " [label=\"" << title << "\", shape=box];\n";
        return;
    }
    os << indent(depth) << "subgraph cluster_n" << id << " {\n";
    os << indent(depth + 1) << "label=\"" << title << "\";\n";
    os << indent(depth + 1) << "style=solid;\n";
    os << indent(depth + 1) << "n" << id << " [label=\"\", shape=point];\n";
    for (NodeId c : kids) emit_place(os, b, c, depth + 1);
    for (int s : sites)
        os << indent(depth + 1) << "site" << s << " [label=\"site " << s
           << "\", shape=box, style=dashed];\n";
    os << indent(depth) << "}\n";
}

} // namespace

std::string export_dot(const Bigraph& b) {
    Bigraph c = canonical_form(b);
    std::ostringstream os;
    os << "digraph bigraph {\n";
    if (!c.nodes.empty() || c.iface.sites > 0 || !c.edges.empty() ||
        !c.iface.outer_names.empty()) {
        os << indent(1) << "compound=true;\n";
        for (int r = 0; r < c.iface.roots; ++r) {
            auto kids = c.children_of(Place::at_root(r));
            auto sites = c.sites_of(Place::at_root(r));
            if (kids.empty() && sites.empty()) continue;
            os << indent(1) << "subgraph cluster_root" << r << " {\n";
            os << indent(2) << "label=\"root " << r << "\";\n";
            os << indent(2) << "style=dotted;\n";
            for (NodeId n : kids) emit_place(os, c, n, 2);
            for (int s : sites)
                os << indent(2) << "site" << s << " [label=\"site " << s
                   << "\", shape=box, style=dashed];\n";
            os << indent(1) << "}\n";
        }
        // Link graph: one fan-out point per link with points.
        for (EdgeId e : c.edges) {
            auto pts = c.points_of(LinkTarget::to_edge(e));
            if (pts.empty()) continue;
            os << indent(1) << "e" << e << " [label=\"\", shape=point, width=0.05];\n";
            for (auto [id, k] : pts)
                os << indent(1) << "n" << id << " -> e" << e << " [style=dashed, dir=none, taillabel=\""
                   << k << "\"];\n";
        }
        for (const auto& y : c.iface.outer_names) {
            auto pts = c.points_of(LinkTarget::to_outer(y));
            os << indent(1) << "\"name_" << y << "\" [label=\"" << y << "\", shape=plaintext];\n";
            for (auto [id, k] : pts)
                os << indent(1) << "n" << id << " -> \"name_" << y
                   << "\" [style=dashed, dir=none, taillabel=\"" << k << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace sbg
