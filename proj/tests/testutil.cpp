#include "testutil.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <sys/wait.h>

namespace testutil {

std::string fixture(const std::string& name) {
    return std::string(SBG_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    std::string out_path = "/tmp/sbg_test_out_" + std::to_string(counter);
    std::string err_path = "/tmp/sbg_test_err_" + std::to_string(counter);
    ++counter;
    std::string cmd = std::string(SBG_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

// --- generators -----------------------------------------------------------

namespace {

int pick(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

template <typename T>
const T& pick_one(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(v.size()) - 1))];
}

const std::vector<std::string> kNamePool = {"x", "y", "z"};
const std::vector<std::string> kLabelPool = {"", "", "red", "blue", "leaf-1"};

std::vector<std::string> control_names(const sbg::Signature& sig, bool containers_only) {
    std::vector<std::string> out;
    for (const auto& [name, c] : sig)
        if (!containers_only || !c.atomic) out.push_back(name);
    return out;
}

// Appends one random node under `parent`; ports wired to outer names or to
// edges from a shared pool.
sbg::NodeId add_rand_node(Rng& rng, sbg::Bigraph& b, const sbg::Place& parent,
                          const std::string& control, bool with_label) {
    sbg::Node n;
    n.id = b.next_node_id++;
    n.control = control;
    if (with_label) n.label = pick_one(rng, kLabelPool);
    int arity = b.signature.at(control).arity;
    for (int k = 0; k < arity; ++k) {
        if (chance(rng, 0.5)) {
            const std::string& nm = pick_one(rng, kNamePool);
            b.iface.outer_names.insert(nm);
            n.ports.push_back(sbg::LinkTarget::to_outer(nm));
        } else {
            sbg::EdgeId e;
            if (!b.edges.empty() && chance(rng, 0.6)) {
                auto it = b.edges.begin();
                std::advance(it, pick(rng, 0, static_cast<int>(b.edges.size()) - 1));
                e = *it;
            } else {
                e = b.next_edge_id++;
                b.edges.insert(e);
            }
            n.ports.push_back(sbg::LinkTarget::to_edge(e));
        }
    }
    b.node_parent[n.id] = parent;
    sbg::NodeId id = n.id;
    b.nodes[id] = std::move(n);
    return id;
}

} // namespace

sbg::Signature rand_signature(Rng& rng) {
    sbg::Signature sig;
    const std::vector<std::string> pool = {"A", "B", "C", "K", "M"};
    int n = pick(rng, 3, static_cast<int>(pool.size()));
    for (int i = 0; i < n; ++i) {
        sbg::Control c;
        c.name = pool[static_cast<std::size_t>(i)];
        c.arity = pick(rng, 0, 2);
        c.atomic = i > 1 && chance(rng, 0.3); // keep a couple of containers
        sig[c.name] = c;
    }
    return sig;
}

sbg::Bigraph rand_ground(Rng& rng, const sbg::Signature& sig, int max_nodes) {
    sbg::Bigraph b = sbg::make_empty(sig, 1);
    int count = pick(rng, 0, max_nodes);
    std::vector<sbg::NodeId> containers;
    auto all = control_names(sig, false);
    for (int i = 0; i < count; ++i) {
        sbg::Place parent = sbg::Place::at_root(0);
        if (!containers.empty() && chance(rng, 0.7))
            parent = sbg::Place::at_node(pick_one(rng, containers));
        const std::string& ctl = pick_one(rng, all);
        sbg::NodeId id = add_rand_node(rng, b, parent, ctl, true);
        if (!sig.at(ctl).atomic) containers.push_back(id);
    }
    return b;
}

sbg::Bigraph rand_solid_redex(Rng& rng, const sbg::Signature& sig, int max_nodes) {
    int regions = pick(rng, 1, 2);
    int budget = std::max(regions, pick(rng, 1, max_nodes));
    sbg::Bigraph b = sbg::make_empty(sig, regions);
    auto all = control_names(sig, false);
    std::vector<sbg::NodeId> containers;
    for (int r = 0; r < regions; ++r) {
        // every region must hold at least one node
        const std::string& ctl = pick_one(rng, all);
        sbg::NodeId id = add_rand_node(rng, b, sbg::Place::at_root(r), ctl, false);
        if (!sig.at(ctl).atomic) containers.push_back(id);
        --budget;
    }
    while (budget-- > 0) {
        sbg::Place parent = sbg::Place::at_root(pick(rng, 0, regions - 1));
        if (!containers.empty() && chance(rng, 0.7))
            parent = sbg::Place::at_node(pick_one(rng, containers));
        const std::string& ctl = pick_one(rng, all);
        sbg::NodeId id = add_rand_node(rng, b, parent, ctl, false);
        if (!sig.at(ctl).atomic) containers.push_back(id);
    }
    // Sites: at most one per container, never at a root.
    int sites = 0;
    for (sbg::NodeId c : containers) {
        if (chance(rng, 0.4)) {
            b.site_parent[sites++] = sbg::Place::at_node(c);
            b.iface.sites = sites;
        }
    }
    // Close a used outer name now and then.
    if (!b.iface.outer_names.empty() && chance(rng, 0.5))
        return sbg::close_name(b, *b.iface.outer_names.begin());
    return b;
}

sbg::Bigraph rand_open(Rng& rng, const sbg::Signature& sig, int sites,
                       const std::set<std::string>& inner_names, int max_nodes) {
    sbg::Bigraph b = rand_ground(rng, sig, max_nodes);
    b.iface.roots = pick(rng, 1, 2);
    // rand_ground built everything under root 0; move some top nodes over
    if (b.iface.roots == 2)
        for (auto& [id, parent] : b.node_parent) {
            (void)id;
            if (parent.is_root() && chance(rng, 0.4)) parent = sbg::Place::at_root(1);
        }
    b.iface.sites = sites;
    std::vector<sbg::Place> spots{sbg::Place::at_root(0)};
    for (const auto& [id, n] : b.nodes)
        if (!sig.at(n.control).atomic) spots.push_back(sbg::Place::at_node(id));
    for (int s = 0; s < sites; ++s) b.site_parent[s] = pick_one(rng, spots);
    b.iface.inner_names = inner_names;
    for (const auto& x : inner_names) {
        if (chance(rng, 0.5)) {
            const std::string& nm = pick_one(rng, kNamePool);
            b.iface.outer_names.insert(nm);
            b.inner_links[x] = sbg::LinkTarget::to_outer(nm);
        } else {
            sbg::EdgeId e = b.next_edge_id++;
            b.edges.insert(e);
            b.inner_links[x] = sbg::LinkTarget::to_edge(e);
        }
    }
    return b;
}

sbg::Bigraph pattern_from(Rng& rng, const sbg::Bigraph& agent) {
    if (agent.nodes.empty()) return rand_solid_redex(rng, agent.signature, 3);

    // Choose the included node set: a root node plus, per node, either all
    // children (exact), some children plus a site, or a site alone.
    std::vector<sbg::NodeId> all;
    for (const auto& [id, n] : agent.nodes) {
        (void)n;
        all.push_back(id);
    }
    const std::size_t cap = 5;
    std::set<sbg::NodeId> included;
    std::map<sbg::NodeId, bool> wants_site;
    auto grow = [&](auto&& self, sbg::NodeId u, int depth) -> void {
        included.insert(u);
        auto kids = agent.children_of(sbg::Place::at_node(u));
        if (kids.empty()) return;
        bool full = included.size() + kids.size() > cap;
        int mode = (depth >= 2 || full) ? 2 : pick(rng, 0, 2); // 0 all, 1 some+site, 2 site
        if (mode == 0) {
            for (sbg::NodeId k : kids) self(self, k, depth + 1);
        } else if (mode == 1) {
            wants_site[u] = true;
            for (sbg::NodeId k : kids)
                if (included.size() < cap && chance(rng, 0.5)) self(self, k, depth + 1);
        } else {
            wants_site[u] = true;
        }
    };
    sbg::NodeId seed = pick_one(rng, all);
    grow(grow, seed, 0);
    // occasionally a second region from an unrelated node
    if (included.size() < cap && chance(rng, 0.3)) {
        std::vector<sbg::NodeId> rest;
        for (sbg::NodeId id : all) {
            bool clashes = included.count(id) != 0;
            // avoid ancestors/descendants of the first pattern
            for (sbg::NodeId d : agent.descendants_of(id)) clashes = clashes || included.count(d);
            for (sbg::NodeId d : agent.descendants_of(seed)) clashes = clashes || d == id;
            if (!clashes) rest.push_back(id);
        }
        if (!rest.empty()) grow(grow, pick_one(rng, rest), 0);
    }

    // Region roots: included nodes whose parents are not included.
    std::vector<sbg::NodeId> tops;
    for (sbg::NodeId id : included) {
        sbg::Place p = agent.node_parent.at(id);
        if (!p.is_node() || included.count(p.index) == 0) tops.push_back(id);
    }

    sbg::Bigraph redex;
    redex.signature = agent.signature;
    redex.iface.roots = static_cast<int>(tops.size());

    std::map<sbg::NodeId, sbg::NodeId> nm; // agent -> pattern
    for (sbg::NodeId id : included) nm[id] = redex.next_node_id++;

    // Links: a closed agent edge fully inside the pattern stays closed;
    // everything else opens into a fresh outer name, one per agent link.
    std::map<sbg::LinkTarget, sbg::LinkTarget> link_map;
    int open_names = 0;
    auto pattern_link = [&](const sbg::LinkTarget& agent_link) -> sbg::LinkTarget {
        auto it = link_map.find(agent_link);
        if (it != link_map.end()) return it->second;
        bool closed = agent_link.is_edge();
        if (closed)
            for (auto [nid, k] : agent.points_of(agent_link)) {
                (void)k;
                closed = closed && included.count(nid) != 0;
            }
        sbg::LinkTarget mapped;
        if (closed) {
            sbg::EdgeId e = redex.next_edge_id++;
            redex.edges.insert(e);
            mapped = sbg::LinkTarget::to_edge(e);
        } else {
            std::string nm_open = "ln" + std::to_string(open_names++);
            redex.iface.outer_names.insert(nm_open);
            mapped = sbg::LinkTarget::to_outer(nm_open);
        }
        link_map.emplace(agent_link, mapped);
        return mapped;
    };

    std::map<sbg::NodeId, int> region_of;
    for (std::size_t r = 0; r < tops.size(); ++r) region_of[tops[r]] = static_cast<int>(r);
    int sites = 0;
    for (sbg::NodeId id : included) {
        const sbg::Node& src = agent.node(id);
        sbg::Node n;
        n.id = nm.at(id);
        n.control = src.control;
        if (!src.label.empty() && chance(rng, 0.3)) n.label = src.label; // constraint
        for (const auto& p : src.ports) n.ports.push_back(pattern_link(p));
        sbg::Place ap = agent.node_parent.at(id);
        if (ap.is_node() && included.count(ap.index))
            redex.node_parent[n.id] = sbg::Place::at_node(nm.at(ap.index));
        else
            redex.node_parent[n.id] = sbg::Place::at_root(region_of.at(id));
        redex.nodes[n.id] = std::move(n);
        if (wants_site.count(id)) {
            redex.site_parent[sites++] = sbg::Place::at_node(nm.at(id));
            redex.iface.sites = sites;
        }
    }
    return redex;
}

namespace {

sbg::ReactionRule finish_rule(Rng& rng, const sbg::Signature& sig, sbg::Bigraph redex) {
    sbg::ReactionRule rule;
    rule.name = "gen";
    rule.redex = std::move(redex);
    sbg::Bigraph reactum = sbg::make_empty(sig, rule.redex.iface.roots);
    auto all = control_names(sig, false);
    std::vector<sbg::NodeId> containers;
    int count = pick(rng, 0, 4);
    for (int i = 0; i < count; ++i) {
        sbg::Place parent = sbg::Place::at_root(pick(rng, 0, reactum.iface.roots - 1));
        if (!containers.empty() && chance(rng, 0.6))
            parent = sbg::Place::at_node(pick_one(rng, containers));
        const std::string& ctl = pick_one(rng, all);
        sbg::NodeId id = add_rand_node(rng, reactum, parent, ctl, false);
        if (!sig.at(ctl).atomic) containers.push_back(id);
    }
    int rsites = rule.redex.iface.sites;
    if (rsites > 0) {
        int uses = pick(rng, 0, rsites + 1); // allows drops and one duplicate
        std::vector<sbg::Place> spots{sbg::Place::at_root(0)};
        for (sbg::NodeId c : containers) spots.push_back(sbg::Place::at_node(c));
        for (int u = 0; u < uses; ++u) {
            reactum.site_parent[u] = pick_one(rng, spots);
            rule.eta.push_back(pick(rng, 0, rsites - 1));
        }
        reactum.iface.sites = uses;
    }
    // Both sides expose the same outer names.
    std::set<std::string> all_names = rule.redex.iface.outer_names;
    all_names.insert(reactum.iface.outer_names.begin(), reactum.iface.outer_names.end());
    rule.redex.iface.outer_names = all_names;
    reactum.iface.outer_names = all_names;
    rule.reactum = std::move(reactum);
    return rule;
}

} // namespace

sbg::ReactionRule rand_rule(Rng& rng, const sbg::Signature& sig) {
    return finish_rule(rng, sig, rand_solid_redex(rng, sig, 4));
}

sbg::ReactionRule rand_rule_for(Rng& rng, const sbg::Bigraph& agent) {
    return finish_rule(rng, agent.signature, pattern_from(rng, agent));
}

std::string rand_program_source(Rng& rng) {
    std::ostringstream os;
    struct Ctl {
        std::string name;
        int arity;
        bool atomic;
    };
    std::vector<Ctl> ctls;
    const std::vector<std::string> pool = {"A", "B", "C", "K"};
    int n = pick(rng, 2, static_cast<int>(pool.size()));
    for (int i = 0; i < n; ++i) {
        Ctl c{pool[static_cast<std::size_t>(i)], pick(rng, 0, 2), i > 0 && chance(rng, 0.25)};
        ctls.push_back(c);
        os << (c.atomic ? "atomic ctrl " : "ctrl ") << c.name << " = " << c.arity << ";\n";
    }

    struct Gen {
        Rng& rng;
        const std::vector<Ctl>& ctls;
        std::set<std::string>* names;
        std::vector<std::string>* sites;          // fresh names, redex style
        const std::vector<std::string>* site_pool; // reuse pool, reactum style
        bool allow_sites;
        int fuel;

        std::string term(int depth) {
            if (fuel <= 0) return "()";
            const Ctl& c = ctls[static_cast<std::size_t>(
                std::uniform_int_distribution<int>(0, static_cast<int>(ctls.size()) - 1)(rng))];
            --fuel;
            std::string t = c.name;
            if (c.arity > 0) {
                t += "{";
                for (int k = 0; k < c.arity; ++k) {
                    std::string nm(1, static_cast<char>(
                                          'x' + std::uniform_int_distribution<int>(0, 2)(rng)));
                    names->insert(nm);
                    t += (k ? "," : "") + nm;
                }
                t += "}";
            }
            if (!c.atomic && depth < 3 &&
                std::uniform_real_distribution<double>(0, 1)(rng) < 0.6) {
                std::vector<std::string> kids;
                int k = std::uniform_int_distribution<int>(0, 2)(rng);
                for (int i = 0; i < k; ++i) kids.push_back(term(depth + 1));
                // Sites live inside nests only: at region level `|` would
                // juxtapose and change the region count.
                if (allow_sites && std::uniform_real_distribution<double>(0, 1)(rng) < 0.4) {
                    if (site_pool) {
                        if (!site_pool->empty())
                            kids.push_back((*site_pool)[static_cast<std::size_t>(
                                std::uniform_int_distribution<int>(
                                    0, static_cast<int>(site_pool->size()) - 1)(rng))]);
                    } else {
                        std::string s = "s" + std::to_string(sites->size());
                        sites->push_back(s);
                        kids.push_back(s);
                    }
                }
                if (!kids.empty()) {
                    t += ".(";
                    for (std::size_t i = 0; i < kids.size(); ++i) t += (i ? " | " : "") + kids[i];
                    t += ")";
                } else if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5) {
                    t += ".()";
                }
            }
            return t;
        }
    };

    int nbigs = pick(rng, 1, 2);
    for (int i = 0; i < nbigs; ++i) {
        std::set<std::string> used;
        std::vector<std::string> sites;
        Gen g{rng, ctls, &used, &sites, nullptr, false, 6};
        int regions = pick(rng, 1, 2);
        std::string body;
        for (int r = 0; r < regions; ++r) {
            g.fuel = std::max(g.fuel, 2);
            body += (r ? " || " : "") + g.term(0);
        }
        if (!used.empty() && chance(rng, 0.5))
            body = "/" + *used.begin() + " (" + body + ")";
        os << "big b" << i << " = " << body << ";\n";
    }

    int nrules = pick(rng, 1, 2);
    for (int i = 0; i < nrules; ++i) {
        std::set<std::string> redex_names;
        std::vector<std::string> redex_sites;
        Gen rg{rng, ctls, &redex_names, &redex_sites, nullptr, true, 5};
        int regions = pick(rng, 1, 2);
        std::string redex;
        for (int r = 0; r < regions; ++r) {
            rg.fuel = std::max(rg.fuel, 2); // a solid region needs a node
            redex += (r ? " || " : "") + rg.term(0);
        }
        std::optional<std::string> closed;
        if (!redex_names.empty() && chance(rng, 0.5)) {
            closed = *redex_names.begin();
            redex = "/" + *closed + " (" + redex + ")";
        }

        std::set<std::string> reactum_names;
        Gen ag{rng, ctls, &reactum_names, nullptr, &redex_sites, true, 4};
        std::string reactum;
        for (int r = 0; r < regions; ++r) {
            ag.fuel = std::max(ag.fuel, 1);
            reactum += (r ? " || " : "") + ag.term(0);
        }
        // a name closed in the redex must not resurface open in the reactum
        if (closed && reactum_names.count(*closed))
            reactum = "/" + *closed + " (" + reactum + ")";
        os << "react r" << i << " = " << redex << " --> " << reactum << ";\n";
    }

    if (chance(rng, 0.5)) {
        os << "begin brs\n  init b0;\n  rules = [{r0}";
        if (nrules > 1 && chance(rng, 0.5)) os << ",{r1}";
        os << "];\nend\n";
    }
    return os.str();
}

std::string encode_occurrence(const sbg::Occurrence& occ) {
    std::ostringstream os;
    os << "n:";
    for (const auto& [u, v] : occ.node_map) os << u << ">" << v << ";";
    os << " s:";
    for (const auto& [s, roots] : occ.site_fill) {
        os << s << ">[";
        for (sbg::NodeId r : roots) os << r << ",";
        os << "];";
    }
    os << " e:";
    for (const auto& [re, ae] : occ.edge_map) os << re << ">" << ae << ";";
    os << " y:";
    for (const auto& [y, link] : occ.name_map) {
        os << y << ">";
        if (link.is_edge())
            os << "e" << link.edge;
        else
            os << link.name;
        os << ";";
    }
    os << " r:";
    for (const auto& [r, place] : occ.region_place)
        os << r << ">" << (place.is_node() ? "n" : "t") << place.index << ";";
    return os.str();
}

} // namespace testutil
