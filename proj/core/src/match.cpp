#include <algorithm>
#include <climits>
#include <set>
#include <sstream>
#include <tuple>

#include "sbg/match.hpp"

namespace sbg {

std::vector<NodeId> Occurrence::image_key() const {
    std::vector<NodeId> key;
    key.reserve(node_map.size());
    for (const auto& [u, v] : node_map) {
        (void)u;
        key.push_back(v);
    }
    return key;
}

std::string Occurrence::summary() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [u, v] : node_map) {
        if (!first) os << ",";
        os << u << "->" << v;
        first = false;
    }
    return os.str();
}

void require_solid(const Bigraph& redex) {
    for (int r = 0; r < redex.iface.roots; ++r)
        if (redex.children_of(Place::at_root(r)).empty())
            fail(Errc::redex_not_solid,
                 "region " + std::to_string(r) + " contains no node");
    for (const auto& [s, parent] : redex.site_parent) {
        if (parent.is_root())
            fail(Errc::redex_not_solid, "site " + std::to_string(s) + " is a root child");
        for (const auto& [s2, parent2] : redex.site_parent)
            if (s2 > s && parent2 == parent)
                fail(Errc::redex_not_solid,
                     "sites " + std::to_string(s) + " and " + std::to_string(s2) +
                         " share a parent");
    }
}

namespace {

// Anchored backtracking over the redex place forest: nodes are assigned
// parent-first, regions are anchored at the rarest control available, and
// candidates are pruned by control, label, arity and link compatibility.
class Matcher {
public:
    Matcher(const Bigraph& agent, const Bigraph& redex) : agent_(agent), redex_(redex) {
        for (const auto& [id, n] : agent_.nodes) ++control_freq_[n.control];
        build_order();
    }

    std::vector<Occurrence> all() {
        assign(0);
        std::sort(results_.begin(), results_.end(), [](const Occurrence& a, const Occurrence& b) {
            return a.image_key() < b.image_key();
        });
        return std::move(results_);
    }

private:
    const Bigraph& agent_;
    const Bigraph& redex_;
    std::map<std::string, int> control_freq_;
    std::vector<NodeId> order_;
    std::map<NodeId, NodeId> nmap_;
    std::set<NodeId> used_;
    std::map<EdgeId, EdgeId> edge_map_;
    std::set<EdgeId> edge_taken_;
    std::map<std::string, LinkTarget> name_map_;
    std::map<std::int64_t, Place> region_place_;
    std::vector<Occurrence> results_;

    int freq(const std::string& control) const {
        auto it = control_freq_.find(control);
        return it == control_freq_.end() ? 0 : it->second;
    }

    void build_order() {
        // Regions sorted by the rarity of their rarest top-level control so
        // the anchor scan stays narrow; within a region, parent-first DFS
        // with rare controls early.
        std::vector<std::pair<int, std::int64_t>> regions;
        for (int r = 0; r < redex_.iface.roots; ++r) {
            int best = INT_MAX;
            for (NodeId c : redex_.children_of(Place::at_root(r)))
                best = std::min(best, freq(redex_.node(c).control));
            regions.emplace_back(best, r);
        }
        std::sort(regions.begin(), regions.end());
        for (auto [w, r] : regions) {
            (void)w;
            std::vector<NodeId> tops = redex_.children_of(Place::at_root(r));
            std::sort(tops.begin(), tops.end(), [&](NodeId a, NodeId b) {
                int fa = freq(redex_.node(a).control), fb = freq(redex_.node(b).control);
                return std::tie(fa, a) < std::tie(fb, b);
            });
            for (NodeId t : tops) dfs_order(t);
        }
    }

    void dfs_order(NodeId u) {
        order_.push_back(u);
        std::vector<NodeId> kids = redex_.children_of(Place::at_node(u));
        std::sort(kids.begin(), kids.end(), [&](NodeId a, NodeId b) {
            int fa = freq(redex_.node(a).control), fb = freq(redex_.node(b).control);
            return std::tie(fa, a) < std::tie(fb, b);
        });
        for (NodeId k : kids) dfs_order(k);
    }

    bool ports_compatible(NodeId u, NodeId v,
                          std::vector<std::pair<EdgeId, EdgeId>>& edges_added,
                          std::vector<std::string>& names_added) {
        const Node& ru = redex_.node(u);
        const Node& av = agent_.node(v);
        for (std::size_t k = 0; k < ru.ports.size(); ++k) {
            const LinkTarget& rt = ru.ports[k];
            const LinkTarget& at = av.ports[k];
            if (rt.is_edge()) {
                if (!at.is_edge()) return false;
                auto it = edge_map_.find(rt.edge);
                if (it != edge_map_.end()) {
                    if (it->second != at.edge) return false;
                } else {
                    if (edge_taken_.count(at.edge)) return false;
                    // Point counts must agree for the exactness condition to
                    // have any chance; full point-set equality is re-checked
                    // at the end.
                    if (agent_.points_of(at).size() != redex_.points_of(rt).size()) return false;
                    edge_map_[rt.edge] = at.edge;
                    edge_taken_.insert(at.edge);
                    edges_added.push_back({rt.edge, at.edge});
                }
            } else {
                auto it = name_map_.find(rt.name);
                if (it != name_map_.end()) {
                    if (!(it->second == at)) return false;
                } else {
                    name_map_.emplace(rt.name, at);
                    names_added.push_back(rt.name);
                }
            }
        }
        return true;
    }

    void assign(std::size_t depth) {
        if (depth == order_.size()) {
            finalize();
            return;
        }
        NodeId u = order_[depth];
        const Node& ru = redex_.node(u);
        Place pu = redex_.node_parent.at(u);

        std::vector<NodeId> candidates;
        if (pu.is_node()) {
            candidates = agent_.children_of(Place::at_node(nmap_.at(pu.index)));
        } else if (auto it = region_place_.find(pu.index); it != region_place_.end()) {
            candidates = agent_.children_of(it->second);
        } else {
            for (const auto& [v, n] : agent_.nodes) {
                (void)n;
                candidates.push_back(v);
            }
        }

        for (NodeId v : candidates) {
            const Node& av = agent_.node(v);
            if (used_.count(v)) continue;
            if (av.control != ru.control) continue;
            if (!ru.label.empty() && ru.label != av.label) continue;

            bool fresh_region = false;
            if (pu.is_root() && region_place_.count(pu.index) == 0) {
                region_place_[pu.index] = agent_.node_parent.at(v);
                fresh_region = true;
            }
            std::vector<std::pair<EdgeId, EdgeId>> edges_added;
            std::vector<std::string> names_added;
            if (ports_compatible(u, v, edges_added, names_added)) {
                nmap_[u] = v;
                used_.insert(v);
                assign(depth + 1);
                nmap_.erase(u);
                used_.erase(v);
            }
            for (auto [re, ae] : edges_added) {
                edge_map_.erase(re);
                edge_taken_.erase(ae);
            }
            for (const auto& nm : names_added) name_map_.erase(nm);
            if (fresh_region) region_place_.erase(pu.index);
        }
    }

    void finalize() {
        Occurrence occ;
        occ.node_map = nmap_;
        occ.edge_map = edge_map_;
        occ.name_map = name_map_;
        occ.region_place = region_place_;

        // Exactness / parameter extraction.
        for (const auto& [u, v] : nmap_) {
            std::set<NodeId> covered;
            for (NodeId c : redex_.children_of(Place::at_node(u))) covered.insert(nmap_.at(c));
            std::vector<int> sites = redex_.sites_of(Place::at_node(u));
            std::vector<NodeId> leftover;
            for (NodeId c : agent_.children_of(Place::at_node(v)))
                if (covered.count(c) == 0) leftover.push_back(c);
            if (sites.empty()) {
                if (!leftover.empty()) return;
            } else {
                occ.site_fill[sites.front()] = std::move(leftover);
            }
        }
        for (int s = 0; s < redex_.iface.sites; ++s)
            if (occ.site_fill.count(s) == 0) occ.site_fill[s] = {};

        // Closed-edge exactness on full point sets.
        for (const auto& [re, ae] : edge_map_) {
            std::vector<std::pair<NodeId, int>> expected;
            for (auto [u, k] : redex_.points_of(LinkTarget::to_edge(re)))
                expected.emplace_back(nmap_.at(u), k);
            std::sort(expected.begin(), expected.end());
            if (agent_.points_of(LinkTarget::to_edge(ae)) != expected) return;
        }

        // Occurrence territory must not swallow other regions or parameters.
        std::set<NodeId> params;
        for (const auto& [s, roots] : occ.site_fill) {
            (void)s;
            for (NodeId r : roots)
                for (NodeId d : agent_.descendants_of(r)) params.insert(d);
        }
        for (NodeId p : params)
            if (used_.count(p)) return;
        for (const auto& [r, place] : region_place_) {
            (void)r;
            if (place.is_node() && (used_.count(place.index) || params.count(place.index)))
                return;
        }
        results_.push_back(std::move(occ));
    }
};

} // namespace

std::vector<Occurrence> find_occurrences(const Bigraph& agent, const Bigraph& redex) {
    if (!agent.is_ground())
        fail(Errc::validation_error, "match agent must be ground");
    require_solid(redex);
    return Matcher(agent, redex).all();
}

std::size_t count_occurrences(const Bigraph& agent, const Bigraph& redex) {
    return find_occurrences(agent, redex).size();
}

} // namespace sbg
