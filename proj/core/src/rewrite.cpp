#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sbg/canon.hpp"
#include "sbg/rewrite.hpp"

namespace sbg {

namespace {

void erase_node(Bigraph& b, NodeId id) {
    b.nodes.erase(id);
    b.node_parent.erase(id);
}

} // namespace

Bigraph apply(const Bigraph& agent, const ReactionRule& rule, const Occurrence& occ) {
    auto check = derive_occurrence(agent, rule.redex, occ.node_map);
    if (!check)
        fail(Errc::stale_occurrence, "occurrence does not embed redex of " + rule.name);
    const Occurrence& o = *check;

    Bigraph out = agent;

    // Remove the matched image and the agent edges matched by redex closed
    // edges. Closed-edge exactness guarantees no context port touches them.
    for (const auto& [u, v] : o.node_map) {
        (void)u;
        erase_node(out, v);
    }
    for (const auto& [re, ae] : o.edge_map) {
        (void)re;
        out.edges.erase(ae);
    }

    // Instantiate the reactum with fresh node ids; fresh edges for its
    // closed edges.
    std::map<NodeId, NodeId> rn; // reactum node -> fresh agent node
    for (const auto& [id, n] : rule.reactum.nodes) {
        (void)n;
        rn[id] = out.next_node_id++;
    }
    std::map<EdgeId, EdgeId> re_map;
    for (EdgeId e : rule.reactum.edges) re_map[e] = out.next_edge_id++;
    for (const auto& [e, fresh] : re_map) {
        (void)e;
        out.edges.insert(fresh);
    }

    auto reactum_link = [&](const LinkTarget& t) -> LinkTarget {
        if (t.is_edge()) return LinkTarget::to_edge(re_map.at(t.edge));
        auto it = o.name_map.find(t.name);
        if (it != o.name_map.end()) return it->second;
        // Name idle in the redex: bind to the agent's equally-named open
        // link, declaring it if absent.
        out.iface.outer_names.insert(t.name);
        return t;
    };
    auto reactum_place = [&](const Place& p) -> Place {
        if (p.is_node()) return Place::at_node(rn.at(p.index));
        return o.region_place.at(p.index);
    };
    for (const auto& [id, n] : rule.reactum.nodes) {
        Node m;
        m.id = rn.at(id);
        m.control = n.control;
        m.label = n.label;
        for (const auto& p : n.ports) m.ports.push_back(reactum_link(p));
        out.nodes[m.id] = std::move(m);
        out.node_parent[rn.at(id)] = reactum_place(rule.reactum.node_parent.at(id));
    }
    out.signature = [&] {
        Signature s = out.signature;
        for (const auto& [name, c] : rule.reactum.signature)
            if (!s.count(name)) s.emplace(name, c);
        return s;
    }();

    // Re-plant parameters per eta. The first use of a redex parameter keeps
    // its agent ids; further uses are deep copies with fresh ids sharing the
    // original links. Unused parameters are deleted.
    std::set<int> redex_sites_used;
    for (int rs : rule.eta) redex_sites_used.insert(rs);
    for (int rs = 0; rs < rule.redex.iface.sites; ++rs) {
        if (redex_sites_used.count(rs)) continue;
        for (NodeId root : o.site_fill.at(rs))
            for (NodeId d : agent.descendants_of(root)) erase_node(out, d);
    }

    std::set<int> planted;
    for (int reactum_site = 0; reactum_site < rule.reactum.iface.sites; ++reactum_site) {
        int rs = rule.eta.at(reactum_site);
        Place where = reactum_place(rule.reactum.site_parent.at(reactum_site));
        const std::vector<NodeId>& roots = o.site_fill.at(rs);
        if (planted.insert(rs).second) {
            for (NodeId root : roots) out.node_parent[root] = where;
        } else {
            // duplicate: copy the whole forest, fresh ids, shared links
            for (NodeId root : roots) {
                std::map<NodeId, NodeId> copy_map;
                for (NodeId d : agent.descendants_of(root))
                    copy_map[d] = out.next_node_id++;
                for (auto [orig, fresh] : copy_map) {
                    const Node& src = agent.node(orig);
                    Node m = src;
                    m.id = fresh;
                    out.nodes[fresh] = std::move(m);
                    Place pp = agent.node_parent.at(orig);
                    if (orig == root)
                        out.node_parent[fresh] = where;
                    else
                        out.node_parent[fresh] = Place::at_node(copy_map.at(pp.index));
                }
            }
        }
    }
    return out;
}

std::optional<std::pair<std::size_t, Occurrence>> choose_step(const Bigraph& state,
                                                              const BrsSpec& spec) {
    for (const auto& cls : spec.classes) {
        for (std::size_t idx : cls) {
            auto occs = find_occurrences(state, spec.rules.at(idx).redex);
            if (!occs.empty()) return std::make_pair(idx, occs.front());
        }
    }
    return std::nullopt;
}

std::optional<std::pair<Bigraph, StepRecord>> step(const Bigraph& state, const BrsSpec& spec) {
    auto choice = choose_step(state, spec);
    if (!choice) return std::nullopt;
    const ReactionRule& rule = spec.rules.at(choice->first);
    Bigraph next = apply(state, rule, choice->second);
    StepRecord rec;
    rec.rule = rule.name;
    rec.occurrence = choice->second.summary();
    rec.state_hash = canonical_hash(next);
    return std::make_pair(std::move(next), std::move(rec));
}

Trace run(const BrsSpec& spec, std::size_t max_steps) {
    Trace tr;
    Bigraph state = spec.init;
    for (std::size_t i = 0; i < max_steps; ++i) {
        auto next = step(state, spec);
        if (!next) break;
        next->second.index = i;
        tr.steps.push_back(next->second);
        state = std::move(next->first);
    }
    tr.reason = choose_step(state, spec) ? "max_steps" : "quiescent";
    tr.final_state = std::move(state);
    tr.final_hash = canonical_hash(tr.final_state);
    return tr;
}

std::string Trace::to_jsonl() const {
    std::ostringstream os;
    for (const auto& s : steps) {
        nlohmann::json line = {{"index", s.index},
                               {"rule", s.rule},
                               {"occurrence", s.occurrence},
                               {"hash", s.state_hash}};
        os << line.dump() << "\n";
    }
    nlohmann::json fin = {{"final_hash", final_hash}, {"reason", reason}};
    os << fin.dump() << "\n";
    return os.str();
}

bool check_predicate(const Bigraph& state, const Predicate& pred) {
    switch (pred.kind) {
    case Predicate::Kind::occurs:
    case Predicate::Kind::count: {
        std::size_t n;
        try {
            n = count_occurrences(state, pred.pattern);
        } catch (const Error& e) {
            if (e.code() == Errc::redex_not_solid)
                fail(Errc::pattern_not_solid, e.what());
            throw;
        }
        if (pred.kind == Predicate::Kind::occurs) return n > 0;
        auto k = static_cast<std::int64_t>(n);
        switch (pred.cmp) {
        case Predicate::Cmp::lt: return k < pred.bound;
        case Predicate::Cmp::le: return k <= pred.bound;
        case Predicate::Cmp::eq: return k == pred.bound;
        case Predicate::Cmp::ge: return k >= pred.bound;
        case Predicate::Cmp::gt: return k > pred.bound;
        case Predicate::Cmp::ne: return k != pred.bound;
        }
        return false;
    }
    case Predicate::Kind::name_linked: {
        // True when two nodes labelled x and y sit on one shared link.
        std::vector<LinkTarget> links;
        for (EdgeId e : state.edges) links.push_back(LinkTarget::to_edge(e));
        for (const auto& y : state.iface.outer_names) links.push_back(LinkTarget::to_outer(y));
        for (const auto& link : links) {
            bool has_x = false, has_y = false;
            for (auto [id, port] : state.points_of(link)) {
                (void)port;
                const std::string& lbl = state.node(id).label;
                has_x = has_x || lbl == pred.label_x;
                has_y = has_y || lbl == pred.label_y;
            }
            if (has_x && has_y) return true;
        }
        return false;
    }
    }
    return false;
}

} // namespace sbg
