#include "sbg/bigraph.hpp"

#include <algorithm>
#include <functional>
#include <regex>
#include <sstream>

namespace sbg {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::interface_mismatch: return "InterfaceMismatch";
    case Errc::signature_conflict: return "SignatureConflict";
    case Errc::not_prime: return "NotPrime";
    case Errc::unknown_name: return "UnknownName";
    case Errc::lex_error: return "LexError";
    case Errc::parse_error: return "ParseError";
    case Errc::unknown_control: return "UnknownControl";
    case Errc::arity_mismatch: return "ArityMismatch";
    case Errc::unbound_site: return "UnboundSite";
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::atomic_nesting: return "AtomicNesting";
    case Errc::redex_not_solid: return "RedexNotSolid";
    case Errc::size_limit: return "SizeLimit";
    case Errc::stale_occurrence: return "StaleOccurrence";
    case Errc::pattern_not_solid: return "PatternNotSolid";
    case Errc::unknown_category: return "UnknownCategory";
    case Errc::duplicate_sibling_label: return "DuplicateSiblingLabel";
    case Errc::missing_label: return "MissingLabel";
    case Errc::invalid_label: return "InvalidLabel";
    case Errc::invalid_name: return "InvalidName";
    case Errc::not_found: return "NotFound";
    case Errc::ambiguous: return "Ambiguous";
    case Errc::atomic_scope: return "AtomicScope";
    case Errc::unknown_boundary_name: return "UnknownBoundaryName";
    case Errc::scope_missing: return "ScopeMissing";
    case Errc::validation_error: return "ValidationError";
    case Errc::static_schema_violation: return "StaticSchemaViolation";
    }
    return "Error";
}

const Node& Bigraph::node(NodeId id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail(Errc::not_found, "no node " + std::to_string(id));
    return it->second;
}

const Control& Bigraph::control_of(NodeId id) const {
    const Node& n = node(id);
    auto it = signature.find(n.control);
    if (it == signature.end()) fail(Errc::unknown_control, n.control);
    return it->second;
}

std::vector<NodeId> Bigraph::children_of(const Place& p) const {
    std::vector<NodeId> out;
    for (const auto& [id, parent] : node_parent)
        if (parent == p) out.push_back(id);
    return out;
}

std::vector<int> Bigraph::sites_of(const Place& p) const {
    std::vector<int> out;
    for (const auto& [s, parent] : site_parent)
        if (parent == p) out.push_back(s);
    return out;
}

std::vector<NodeId> Bigraph::descendants_of(NodeId id) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        for (NodeId c : children_of(Place::at_node(cur))) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::int64_t Bigraph::root_of(NodeId id) const {
    Place p = Place::at_node(id);
    std::size_t guard = nodes.size() + 1;
    while (p.is_node()) {
        auto it = node_parent.find(p.index);
        if (it == node_parent.end() || guard-- == 0)
            fail(Errc::not_found, "node " + std::to_string(id) + " does not reach a root");
        p = it->second;
    }
    return p.index;
}

std::vector<std::pair<NodeId, int>> Bigraph::points_of(const LinkTarget& link) const {
    std::vector<std::pair<NodeId, int>> out;
    for (const auto& [id, n] : nodes)
        for (int k = 0; k < static_cast<int>(n.ports.size()); ++k)
            if (n.ports[k] == link) out.emplace_back(id, k);
    return out;
}

std::vector<std::string> Bigraph::inner_points_of(const LinkTarget& link) const {
    std::vector<std::string> out;
    for (const auto& [x, tgt] : inner_links)
        if (tgt == link) out.push_back(x);
    return out;
}

// --- construction helpers ---------------------------------------------------

Bigraph make_empty(const Signature& sig, int roots) {
    Bigraph b;
    b.signature = sig;
    b.iface.roots = roots;
    return b;
}

Bigraph make_node_bigraph(const Signature& sig, const std::string& control,
                          const std::vector<std::string>& port_names,
                          const std::string& label) {
    auto it = sig.find(control);
    if (it == sig.end()) fail(Errc::unknown_control, control);
    if (static_cast<int>(port_names.size()) != it->second.arity)
        fail(Errc::arity_mismatch,
             control + " expects " + std::to_string(it->second.arity) + " names, got " +
                 std::to_string(port_names.size()));
    Bigraph b;
    b.signature = sig;
    Node n;
    n.id = 0;
    n.control = control;
    n.label = label;
    for (const auto& x : port_names) {
        n.ports.push_back(LinkTarget::to_outer(x));
        b.iface.outer_names.insert(x);
    }
    b.nodes[0] = std::move(n);
    b.node_parent[0] = Place::at_root(0);
    b.next_node_id = 1;
    return b;
}

Bigraph make_hole(const Signature& sig) {
    Bigraph b;
    b.signature = sig;
    b.iface.sites = 1;
    b.site_parent[0] = Place::at_root(0);
    return b;
}

Bigraph make_identity(const Signature& sig, int roots, const std::set<std::string>& names) {
    Bigraph b;
    b.signature = sig;
    b.iface.roots = roots;
    b.iface.sites = roots;
    for (int i = 0; i < roots; ++i) b.site_parent[i] = Place::at_root(i);
    b.iface.inner_names = names;
    b.iface.outer_names = names;
    for (const auto& x : names) b.inner_links[x] = LinkTarget::to_outer(x);
    return b;
}

// --- validate -----------------------------------------------------------------

namespace {

std::string show_place(const Place& p) {
    return (p.is_node() ? "node:" : "root:") + std::to_string(p.index);
}

bool valid_control_name(const std::string& s) {
    static const std::regex re("[A-Z][A-Za-z0-9_]*");
    return std::regex_match(s, re);
}

} // namespace

ValidationReport validate(const Bigraph& b) {
    ValidationReport rep;
    auto flag = [&rep](std::string rule, std::string subject, std::string detail) {
        rep.push_back({std::move(rule), std::move(subject), std::move(detail)});
    };

    for (const auto& [name, c] : b.signature) {
        if (name != c.name) flag("signature key mismatch", name, "control stored under wrong key");
        if (!valid_control_name(c.name)) flag("bad control name", c.name, "must match [A-Z][A-Za-z0-9_]*");
        if (c.arity < 0) flag("negative arity", c.name, "");
    }
    if (b.iface.sites < 0) flag("negative site count", "interface", "");
    if (b.iface.roots < 0) flag("negative root count", "interface", "");

    // Node-level checks.
    for (const auto& [id, n] : b.nodes) {
        if (n.id != id) flag("node key mismatch", std::to_string(id), "");
        auto ctl = b.signature.find(n.control);
        if (ctl == b.signature.end()) {
            flag("unknown control", std::to_string(id), n.control);
            continue;
        }
        if (static_cast<int>(n.ports.size()) != ctl->second.arity)
            flag("arity mismatch", std::to_string(id),
                 n.control + " arity " + std::to_string(ctl->second.arity) + ", ports " +
                     std::to_string(n.ports.size()));
        for (const auto& p : n.ports) {
            if (p.is_edge() && b.edges.count(p.edge) == 0)
                flag("dangling edge reference", std::to_string(id), std::to_string(p.edge));
            if (p.is_outer() && b.iface.outer_names.count(p.name) == 0)
                flag("dangling outer name", std::to_string(id), p.name);
        }
        if (b.node_parent.count(id) == 0) flag("orphan node", std::to_string(id), "no parent entry");
    }

    // Parent structure is a forest over declared nodes/sites/roots.
    for (const auto& [id, parent] : b.node_parent) {
        if (b.nodes.count(id) == 0) flag("parent entry for unknown node", std::to_string(id), "");
        if (parent.is_node() && b.nodes.count(parent.index) == 0)
            flag("parent is unknown node", std::to_string(id), show_place(parent));
        if (parent.is_root() && (parent.index < 0 || parent.index >= b.iface.roots))
            flag("parent root out of range", std::to_string(id), show_place(parent));
        if (parent.is_node() && b.nodes.count(parent.index)) {
            auto ctl = b.signature.find(b.nodes.at(parent.index).control);
            if (ctl != b.signature.end() && ctl->second.atomic)
                flag("atomic control has children", std::to_string(parent.index),
                     "child " + std::to_string(id));
        }
    }
    for (const auto& [s, parent] : b.site_parent) {
        if (s < 0 || s >= b.iface.sites) flag("site out of range", std::to_string(s), "");
        if (parent.is_node() && b.nodes.count(parent.index) == 0)
            flag("site parent is unknown node", std::to_string(s), show_place(parent));
        if (parent.is_root() && (parent.index < 0 || parent.index >= b.iface.roots))
            flag("site parent root out of range", std::to_string(s), show_place(parent));
        if (parent.is_node() && b.nodes.count(parent.index)) {
            auto ctl = b.signature.find(b.nodes.at(parent.index).control);
            if (ctl != b.signature.end() && ctl->second.atomic)
                flag("atomic control has children", std::to_string(parent.index),
                     "site " + std::to_string(s));
        }
    }
    for (int s = 0; s < b.iface.sites; ++s)
        if (b.site_parent.count(s) == 0) flag("site without parent", std::to_string(s), "");

    // Cycle detection: walk up from every node, bounded by node count.
    for (const auto& [id, n] : b.nodes) {
        (void)n;
        Place p = Place::at_node(id);
        std::size_t hops = 0;
        bool reached = false;
        while (hops <= b.nodes.size()) {
            if (p.is_root()) { reached = true; break; }
            auto it = b.node_parent.find(p.index);
            if (it == b.node_parent.end()) break;
            p = it->second;
            ++hops;
        }
        if (!reached) flag("not a forest", std::to_string(id), "node does not reach a root");
    }

    // Inner names wire to real links.
    for (const auto& x : b.iface.inner_names)
        if (b.inner_links.count(x) == 0) flag("inner name unwired", x, "");
    for (const auto& [x, tgt] : b.inner_links) {
        if (b.iface.inner_names.count(x) == 0) flag("inner link for undeclared name", x, "");
        if (tgt.is_edge() && b.edges.count(tgt.edge) == 0)
            flag("dangling edge reference", x, std::to_string(tgt.edge));
        if (tgt.is_outer() && b.iface.outer_names.count(tgt.name) == 0)
            flag("dangling outer name", x, tgt.name);
    }
    return rep;
}

// --- composition ---------------------------------------------------------------

namespace {

Signature merge_signatures(const Signature& a, const Signature& b) {
    Signature out = a;
    for (const auto& [name, c] : b) {
        auto it = out.find(name);
        if (it == out.end()) {
            out.emplace(name, c);
        } else if (it->second.arity != c.arity || it->second.atomic != c.atomic) {
            fail(Errc::signature_conflict,
                 name + " declared with arity " + std::to_string(it->second.arity) + " and " +
                     std::to_string(c.arity));
        }
    }
    return out;
}

LinkTarget remap_edge(const LinkTarget& t, const std::map<EdgeId, EdgeId>& em) {
    if (t.is_edge()) return LinkTarget::to_edge(em.at(t.edge));
    return t;
}

} // namespace

Bigraph compose(const Bigraph& outer, const Bigraph& inner) {
    if (inner.iface.roots != outer.iface.sites ||
        inner.iface.outer_names != outer.iface.inner_names) {
        std::ostringstream os;
        os << "expected <" << outer.iface.sites << ",{";
        for (const auto& x : outer.iface.inner_names) os << x << ",";
        os << "}>, got <" << inner.iface.roots << ",{";
        for (const auto& x : inner.iface.outer_names) os << x << ",";
        os << "}>";
        fail(Errc::interface_mismatch, os.str());
    }

    Bigraph out;
    out.signature = merge_signatures(outer.signature, inner.signature);
    out.iface.roots = outer.iface.roots;
    out.iface.outer_names = outer.iface.outer_names;
    out.iface.sites = inner.iface.sites;
    out.iface.inner_names = inner.iface.inner_names;

    std::map<NodeId, NodeId> outer_nm, inner_nm;
    NodeId next = 0;
    for (const auto& [id, n] : outer.nodes) { (void)n; outer_nm[id] = next++; }
    for (const auto& [id, n] : inner.nodes) { (void)n; inner_nm[id] = next++; }
    out.next_node_id = next;

    std::map<EdgeId, EdgeId> outer_em, inner_em;
    EdgeId enext = 0;
    for (EdgeId e : outer.edges) outer_em[e] = enext++;
    for (EdgeId e : inner.edges) inner_em[e] = enext++;
    for (EdgeId e = 0; e < enext; ++e) out.edges.insert(e);
    out.next_edge_id = enext;

    // Outer content: structure kept, ids remapped.
    for (const auto& [id, n] : outer.nodes) {
        Node m = n;
        m.id = outer_nm[id];
        for (auto& p : m.ports) p = remap_edge(p, outer_em);
        out.nodes[m.id] = std::move(m);
    }
    auto remap_outer_place = [&](const Place& p) {
        return p.is_node() ? Place::at_node(outer_nm.at(p.index)) : p;
    };
    for (const auto& [id, parent] : outer.node_parent)
        out.node_parent[outer_nm[id]] = remap_outer_place(parent);

    // Inner content: roots plug into outer's sites; outer names of the inner
    // value are rerouted through outer's inner links.
    auto route_inner_target = [&](const LinkTarget& t) -> LinkTarget {
        if (t.is_edge()) return LinkTarget::to_edge(inner_em.at(t.edge));
        LinkTarget via = outer.inner_links.at(t.name);
        if (via.is_edge()) return LinkTarget::to_edge(outer_em.at(via.edge));
        return via;
    };
    auto remap_inner_place = [&](const Place& p) -> Place {
        if (p.is_node()) return Place::at_node(inner_nm.at(p.index));
        Place socket = outer.site_parent.at(static_cast<int>(p.index));
        return remap_outer_place(socket);
    };
    for (const auto& [id, n] : inner.nodes) {
        Node m = n;
        m.id = inner_nm[id];
        for (auto& p : m.ports) p = route_inner_target(p);
        out.nodes[m.id] = std::move(m);
    }
    for (const auto& [id, parent] : inner.node_parent)
        out.node_parent[inner_nm[id]] = remap_inner_place(parent);
    for (const auto& [s, parent] : inner.site_parent)
        out.site_parent[s] = remap_inner_place(parent);
    for (const auto& [x, tgt] : inner.inner_links)
        out.inner_links[x] = route_inner_target(tgt);

    return out;
}

Bigraph juxtapose(const Bigraph& a, const Bigraph& b) {
    Bigraph out;
    out.signature = merge_signatures(a.signature, b.signature);
    out.iface.roots = a.iface.roots + b.iface.roots;
    out.iface.sites = a.iface.sites + b.iface.sites;
    out.iface.outer_names = a.iface.outer_names;
    out.iface.outer_names.insert(b.iface.outer_names.begin(), b.iface.outer_names.end());
    for (const auto& x : a.iface.inner_names)
        if (b.iface.inner_names.count(x))
            fail(Errc::duplicate_name, "inner name " + x + " on both operands");
    out.iface.inner_names = a.iface.inner_names;
    out.iface.inner_names.insert(b.iface.inner_names.begin(), b.iface.inner_names.end());

    std::map<NodeId, NodeId> am, bm;
    NodeId next = 0;
    for (const auto& [id, n] : a.nodes) { (void)n; am[id] = next++; }
    for (const auto& [id, n] : b.nodes) { (void)n; bm[id] = next++; }
    out.next_node_id = next;

    std::map<EdgeId, EdgeId> ae, be;
    EdgeId enext = 0;
    for (EdgeId e : a.edges) ae[e] = enext++;
    for (EdgeId e : b.edges) be[e] = enext++;
    for (EdgeId e = 0; e < enext; ++e) out.edges.insert(e);
    out.next_edge_id = enext;

    auto import = [&out](const Bigraph& src, const std::map<NodeId, NodeId>& nm,
                         const std::map<EdgeId, EdgeId>& em, int root_off, int site_off) {
        auto remap_place = [&](const Place& p) {
            if (p.is_node()) return Place::at_node(nm.at(p.index));
            return Place::at_root(p.index + root_off);
        };
        for (const auto& [id, n] : src.nodes) {
            Node m = n;
            m.id = nm.at(id);
            for (auto& p : m.ports) p = remap_edge(p, em);
            out.nodes[m.id] = std::move(m);
        }
        for (const auto& [id, parent] : src.node_parent)
            out.node_parent[nm.at(id)] = remap_place(parent);
        for (const auto& [s, parent] : src.site_parent)
            out.site_parent[s + site_off] = remap_place(parent);
        for (const auto& [x, tgt] : src.inner_links)
            out.inner_links[x] = remap_edge(tgt, em);
    };
    import(a, am, ae, 0, 0);
    import(b, bm, be, a.iface.roots, a.iface.sites);
    return out;
}

Bigraph merge_under(const Bigraph& parent_expr, const std::vector<Bigraph>& children) {
    if (parent_expr.iface.roots != 1)
        fail(Errc::not_prime, "merge_under parent must be prime");
    if (parent_expr.iface.sites != 1)
        fail(Errc::not_prime, "merge_under parent must have exactly one hole");
    for (const auto& c : children)
        if (c.iface.roots != 1) fail(Errc::not_prime, "merge_under child must be prime");

    // Fold the children into one inner bigraph, then collapse all regions
    // onto a single shared root and plug it into the parent's hole.
    Bigraph inner = make_empty(parent_expr.signature, 1);
    for (const auto& c : children) inner = juxtapose(inner, c);
    for (auto& [id, parent] : inner.node_parent) {
        (void)id;
        if (parent.is_root()) parent = Place::at_root(0);
    }
    for (auto& [s, parent] : inner.site_parent) {
        (void)s;
        if (parent.is_root()) parent = Place::at_root(0);
    }
    inner.iface.roots = 1;

    // compose() requires the inner outer names to equal the parent's inner
    // names; widen the parent with identity wiring for whatever the children
    // use, and fuse names the parent already exposes.
    Bigraph ctx = parent_expr;
    ctx.iface.inner_names = inner.iface.outer_names;
    ctx.inner_links.clear();
    for (const auto& x : inner.iface.outer_names) {
        ctx.iface.outer_names.insert(x);
        ctx.inner_links[x] = LinkTarget::to_outer(x);
    }
    return compose(ctx, inner);
}

Bigraph close_name(const Bigraph& b, const std::string& x) {
    if (b.iface.outer_names.count(x) == 0) fail(Errc::unknown_name, x);
    Bigraph out = b;
    EdgeId e = out.next_edge_id++;
    out.edges.insert(e);
    for (auto& [id, n] : out.nodes) {
        (void)id;
        for (auto& p : n.ports)
            if (p.is_outer() && p.name == x) p = LinkTarget::to_edge(e);
    }
    for (auto& [nm, tgt] : out.inner_links) {
        (void)nm;
        if (tgt.is_outer() && tgt.name == x) tgt = LinkTarget::to_edge(e);
    }
    out.iface.outer_names.erase(x);
    return out;
}

// --- isomorphism -----------------------------------------------------------------

namespace {

struct IsoState {
    const Bigraph& a;
    const Bigraph& b;
    std::map<NodeId, NodeId> nmap;       // a node -> b node
    std::set<NodeId> used;               // b nodes taken
    std::map<EdgeId, EdgeId> emap;       // a edge -> b edge
    std::map<EdgeId, EdgeId> emap_rev;
};

bool link_compatible(IsoState& st, const LinkTarget& pa, const LinkTarget& pb,
                     std::vector<std::pair<EdgeId, EdgeId>>& added) {
    if (pa.is_outer() != pb.is_outer()) return false;
    if (pa.is_outer()) return pa.name == pb.name;
    auto it = st.emap.find(pa.edge);
    if (it != st.emap.end()) return it->second == pb.edge;
    auto rit = st.emap_rev.find(pb.edge);
    if (rit != st.emap_rev.end()) return false;
    st.emap[pa.edge] = pb.edge;
    st.emap_rev[pb.edge] = pa.edge;
    added.emplace_back(pa.edge, pb.edge);
    return true;
}

bool match_nodes(IsoState& st, std::vector<NodeId>::const_iterator it,
                 std::vector<NodeId>::const_iterator end) {
    if (it == end) {
        // All nodes paired; sites must correspond and edge counts must agree
        // (unmapped edges on both sides are idle and pair arbitrarily).
        for (const auto& [s, pa] : st.a.site_parent) {
            Place pb = st.b.site_parent.at(s);
            if (pa.is_root() != pb.is_root()) return false;
            if (pa.is_root()) {
                if (pa.index != pb.index) return false;
            } else if (st.nmap.at(pa.index) != pb.index) {
                return false;
            }
        }
        for (const auto& [x, ta] : st.a.inner_links) {
            const LinkTarget& tb = st.b.inner_links.at(x);
            if (ta.is_outer() != tb.is_outer()) return false;
            if (ta.is_outer()) {
                if (ta.name != tb.name) return false;
            } else {
                auto e = st.emap.find(ta.edge);
                if (e != st.emap.end()) {
                    if (e->second != tb.edge) return false;
                } else if (st.emap_rev.count(tb.edge)) {
                    return false;
                } else {
                    st.emap[ta.edge] = tb.edge;
                    st.emap_rev[tb.edge] = ta.edge;
                }
            }
        }
        return true;
    }
    NodeId ua = *it;
    const Node& na = st.a.node(ua);
    Place parent_a = st.a.node_parent.at(ua);
    for (const auto& [ub, nb] : st.b.nodes) {
        if (st.used.count(ub)) continue;
        if (nb.control != na.control || nb.label != na.label) continue;
        if (nb.ports.size() != na.ports.size()) continue;
        Place parent_b = st.b.node_parent.at(ub);
        if (parent_a.is_root() != parent_b.is_root()) continue;
        if (parent_a.is_root() && parent_a.index != parent_b.index) continue;
        if (parent_a.is_node()) {
            auto mapped = st.nmap.find(parent_a.index);
            // Parents are mapped before children by the ordering below.
            if (mapped == st.nmap.end() || mapped->second != parent_b.index) continue;
        }
        std::vector<std::pair<EdgeId, EdgeId>> added;
        bool ok = true;
        for (std::size_t k = 0; k < na.ports.size() && ok; ++k)
            ok = link_compatible(st, na.ports[k], nb.ports[k], added);
        if (ok) {
            st.nmap[ua] = ub;
            st.used.insert(ub);
            if (match_nodes(st, std::next(it), end)) return true;
            st.nmap.erase(ua);
            st.used.erase(ub);
        }
        for (auto [ea, eb] : added) {
            st.emap.erase(ea);
            st.emap_rev.erase(eb);
        }
    }
    return false;
}

// Preorder over the place forest so parents precede children.
std::vector<NodeId> preorder_nodes(const Bigraph& b) {
    std::vector<NodeId> order;
    std::function<void(const Place&)> walk = [&](const Place& p) {
        for (NodeId c : b.children_of(p)) {
            order.push_back(c);
            walk(Place::at_node(c));
        }
    };
    for (int r = 0; r < b.iface.roots; ++r) walk(Place::at_root(r));
    return order;
}

} // namespace

bool iso_eq(const Bigraph& a, const Bigraph& b) {
    if (a.iface != b.iface) return false;
    if (a.nodes.size() != b.nodes.size()) return false;
    if (a.edges.size() != b.edges.size()) return false;
    if (a.site_parent.size() != b.site_parent.size()) return false;
    for (const auto& [x, t] : a.inner_links) {
        (void)t;
        if (b.inner_links.count(x) == 0) return false;
    }
    std::vector<NodeId> order = preorder_nodes(a);
    if (order.size() != a.nodes.size()) return false; // cyclic / malformed
    IsoState st{a, b, {}, {}, {}, {}};
    return match_nodes(st, order.begin(), order.end());
}

Bigraph renumber(const Bigraph& b, NodeId first_id) {
    std::map<NodeId, NodeId> nm;
    NodeId next = first_id;
    for (const auto& [id, n] : b.nodes) { (void)n; nm[id] = next++; }
    Bigraph out;
    out.signature = b.signature;
    out.iface = b.iface;
    out.edges = b.edges;
    out.inner_links = b.inner_links;
    out.next_node_id = next;
    out.next_edge_id = b.next_edge_id;
    auto remap = [&](const Place& p) {
        return p.is_node() ? Place::at_node(nm.at(p.index)) : p;
    };
    for (const auto& [id, n] : b.nodes) {
        Node m = n;
        m.id = nm.at(id);
        out.nodes[m.id] = std::move(m);
    }
    for (const auto& [id, parent] : b.node_parent) out.node_parent[nm.at(id)] = remap(parent);
    for (const auto& [s, parent] : b.site_parent) out.site_parent[s] = remap(parent);
    return out;
}

} // namespace sbg
