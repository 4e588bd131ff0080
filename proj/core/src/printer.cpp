#include <fstream>
#include <set>
#include <sstream>

#include "sbg/dsl.hpp"

namespace sbg::dsl {

namespace {

// Closure names for the value's closed edges: c0, c1, ... skipping anything
// already visible as an outer name or site name.
std::map<EdgeId, std::string> closure_names(const Bigraph& b,
                                            const std::vector<std::string>& site_names) {
    std::set<std::string> taken(site_names.begin(), site_names.end());
    taken.insert(b.iface.outer_names.begin(), b.iface.outer_names.end());
    std::map<EdgeId, std::string> out;
    int k = 0;
    for (EdgeId e : b.edges) {
        std::string cand;
        do {
            cand = "c" + std::to_string(k++);
        } while (taken.count(cand));
        out[e] = cand;
    }
    return out;
}

std::string show_target(const LinkTarget& t, const std::map<EdgeId, std::string>& cn) {
    return t.is_edge() ? cn.at(t.edge) : t.name;
}

std::string node_expr(const Bigraph& b, NodeId id, const std::map<EdgeId, std::string>& cn,
                      const std::vector<std::string>& site_names);

std::string place_contents(const Bigraph& b, const Place& p,
                           const std::map<EdgeId, std::string>& cn,
                           const std::vector<std::string>& site_names) {
    std::vector<std::string> operands;
    for (NodeId c : b.children_of(p)) operands.push_back(node_expr(b, c, cn, site_names));
    for (int s : b.sites_of(p))
        operands.push_back(s < static_cast<int>(site_names.size())
                               ? site_names[static_cast<std::size_t>(s)]
                               : "s" + std::to_string(s));
    if (operands.empty()) return "1";
    std::string out = operands[0];
    for (std::size_t i = 1; i < operands.size(); ++i) out += " | " + operands[i];
    return out;
}

std::string node_expr(const Bigraph& b, NodeId id, const std::map<EdgeId, std::string>& cn,
                      const std::vector<std::string>& site_names) {
    const Node& n = b.node(id);
    std::string out = n.control;
    if (!n.ports.empty()) {
        out += "{";
        for (std::size_t k = 0; k < n.ports.size(); ++k) {
            if (k) out += ",";
            out += show_target(n.ports[k], cn);
        }
        out += "}";
    }
    Place self = Place::at_node(id);
    if (!b.children_of(self).empty() || !b.sites_of(self).empty())
        out += ".(" + place_contents(b, self, cn, site_names) + ")";
    return out;
}

std::string bigraph_expr(const Bigraph& b, const std::vector<std::string>& site_names) {
    auto cn = closure_names(b, site_names);
    std::string regions;
    for (int r = 0; r < b.iface.roots; ++r) {
        if (r) regions += " || ";
        regions += place_contents(b, Place::at_root(r), cn, site_names);
    }
    if (b.iface.roots == 0) regions = "1"; // degenerate, not produced by the grammar
    if (cn.empty()) return regions;
    std::string out;
    for (const auto& [e, name] : cn) {
        (void)e;
        out += "/" + name + " ";
    }
    return out + "(" + regions + ")";
}

std::string selector_text(const Selector& s) {
    switch (s.kind) {
    case Selector::Kind::labels: return "labels(" + s.control + ")";
    case Selector::Kind::count: return "count(" + s.control + ")";
    case Selector::Kind::scope: return "scope";
    case Selector::Kind::int_lit: return std::to_string(s.value);
    case Selector::Kind::bool_lit: return s.flag ? "true" : "false";
    }
    return "";
}

} // namespace

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    for (const auto& [name, c] : p.signature) {
        (void)name;
        os << (c.atomic ? "atomic ctrl " : "ctrl ") << c.name << " = " << c.arity << ";\n";
    }
    if (!p.signature.empty() && (!p.bigraphs.empty() || !p.rules.empty())) os << "\n";
    for (const auto& [name, big] : p.bigraphs)
        os << "big " << name << " = " << bigraph_expr(big.value, big.site_names) << ";\n";
    for (const auto& r : p.rules) {
        os << "react " << r.rule.name << " = "
           << bigraph_expr(r.rule.redex, r.redex_sites) << " --> "
           << bigraph_expr(r.rule.reactum, r.reactum_sites);
        if (r.rule.escalation) {
            os << " @escalate(" << r.rule.escalation->schema;
            if (!r.rule.escalation->fields.empty()) {
                os << ";";
                for (std::size_t i = 0; i < r.rule.escalation->fields.size(); ++i) {
                    const auto& [field, sel] = r.rule.escalation->fields[i];
                    os << (i ? ", " : " ") << field << "=" << selector_text(sel);
                }
            }
            os << ")";
        }
        os << ";\n";
    }
    if (p.brs) {
        os << "\nbegin brs\n  init ";
        if (p.brs->init_name)
            os << *p.brs->init_name;
        else
            os << bigraph_expr(p.brs->init, {});
        os << ";\n  rules = [";
        for (std::size_t i = 0; i < p.brs->classes.size(); ++i) {
            if (i) os << ",";
            os << "{";
            for (std::size_t j = 0; j < p.brs->classes[i].size(); ++j) {
                if (j) os << ",";
                os << p.brs->classes[i][j];
            }
            os << "}";
        }
        os << "];\nend\n";
    }
    return os.str();
}

Program load_program(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::validation_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_program(buf.str());
}

} // namespace sbg::dsl
