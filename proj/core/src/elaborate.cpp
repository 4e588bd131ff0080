#include <algorithm>
#include <set>

#include "sbg/dsl.hpp"
#include "sbg/match.hpp"

namespace sbg::dsl {

namespace {

struct ElabEnv {
    const Signature& sig;
    std::vector<std::string> site_names; // in site-index order while building
    bool forbid_dup_sites = false;       // redexes need an unambiguous eta
};

// Prime (single-root) elaboration; merges collapse onto one shared root.
Bigraph elab_merged(const ExprPtr& e, ElabEnv& env);

Bigraph collapse_regions(Bigraph b) {
    for (auto& [id, parent] : b.node_parent) {
        (void)id;
        if (parent.is_root()) parent = Place::at_root(0);
    }
    for (auto& [s, parent] : b.site_parent) {
        (void)s;
        if (parent.is_root()) parent = Place::at_root(0);
    }
    b.iface.roots = 1;
    return b;
}

// Region-level elaboration: `||` juxtaposes regions, `|` is merge product.
Bigraph elab_regions(const ExprPtr& e, ElabEnv& env) {
    switch (e->kind) {
    case Expr::Kind::merge: {
        Bigraph l = elab_regions(e->left, env);
        Bigraph r = elab_regions(e->right, env);
        Bigraph j = juxtapose(l, r);
        return e->parallel ? j : collapse_regions(std::move(j));
    }
    case Expr::Kind::closure:
        return close_name(elab_regions(e->body, env), e->closed_name);
    default:
        return elab_merged(e, env);
    }
}

Bigraph elab_merged(const ExprPtr& e, ElabEnv& env) {
    switch (e->kind) {
    case Expr::Kind::merge: {
        Bigraph l = elab_merged(e->left, env);
        Bigraph r = elab_merged(e->right, env);
        return merge_under(make_hole(env.sig), {l, r});
    }
    case Expr::Kind::closure:
        return close_name(elab_merged(e->body, env), e->closed_name);
    case Expr::Kind::empty:
        return make_empty(env.sig, 1);
    case Expr::Kind::site: {
        if (env.forbid_dup_sites)
            for (const auto& seen : env.site_names)
                if (seen == e->site_name)
                    fail(Errc::duplicate_name, "site " + e->site_name + " used twice",
                         e->line, e->column);
        env.site_names.push_back(e->site_name);
        return make_hole(env.sig);
    }
    case Expr::Kind::ctrl: {
        auto it = env.sig.find(e->ctrl_name);
        if (it == env.sig.end())
            fail(Errc::unknown_control, e->ctrl_name, e->line, e->column);
        if (static_cast<int>(e->link_names.size()) != it->second.arity)
            fail(Errc::arity_mismatch,
                 e->ctrl_name + " declared with arity " + std::to_string(it->second.arity) +
                     ", got " + std::to_string(e->link_names.size()) + " names",
                 e->line, e->column);
        Bigraph ion = make_node_bigraph(env.sig, e->ctrl_name, e->link_names);
        if (!e->child) return ion;
        if (it->second.atomic)
            fail(Errc::atomic_nesting, e->ctrl_name + " is atomic and admits no children",
                 e->line, e->column);
        // Give the ion a hole under its node, then merge the child in.
        ion.iface.sites = 1;
        ion.site_parent[0] = Place::at_node(0);
        return merge_under(ion, {elab_merged(e->child, env)});
    }
    }
    fail(Errc::parse_error, "unreachable expression kind");
}

// Remap site indices so the canonical print traversal (regions ascending,
// child nodes before sites within a parent) meets sites in index order.
// Keeps pretty_print / parse round trips index-stable.
std::vector<int> site_traversal_order(const Bigraph& b) {
    std::vector<int> order;
    // Sites directly under a place are listed after that place's subtrees,
    // mirroring the printer's operand order.
    auto walk = [&](auto&& self, const Place& p) -> void {
        for (NodeId c : b.children_of(p)) self(self, Place::at_node(c));
        for (int s : b.sites_of(p)) order.push_back(s);
    };
    for (int r = 0; r < b.iface.roots; ++r) walk(walk, Place::at_root(r));
    return order;
}

// old index -> new index permutation; names table permuted alongside.
std::vector<int> normalize_sites(Bigraph& b, std::vector<std::string>& names) {
    std::vector<int> order = site_traversal_order(b);
    std::vector<int> perm(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) perm[order[pos]] = static_cast<int>(pos);
    std::map<int, Place> remapped;
    for (const auto& [s, parent] : b.site_parent) remapped[perm[s]] = parent;
    b.site_parent = std::move(remapped);
    std::vector<std::string> renamed(names.size());
    for (std::size_t s = 0; s < names.size(); ++s) renamed[perm[s]] = names[s];
    names = std::move(renamed);
    return perm;
}

ElabBigraph elaborate_expr(const ExprPtr& e, const Signature& sig,
                           bool forbid_dup_sites = false) {
    ElabEnv env{sig, {}, forbid_dup_sites};
    ElabBigraph out;
    out.value = elab_regions(e, env);
    out.site_names = std::move(env.site_names);
    normalize_sites(out.value, out.site_names);
    return out;
}

} // namespace

const ElabBigraph* Program::find_bigraph(const std::string& name) const {
    for (const auto& [n, b] : bigraphs)
        if (n == name) return &b;
    return nullptr;
}

const ElabRule* Program::find_rule(const std::string& name) const {
    for (const auto& r : rules)
        if (r.rule.name == name) return &r;
    return nullptr;
}

BrsSpec Program::to_brs_spec() const {
    if (!brs) fail(Errc::validation_error, "program has no brs block");
    BrsSpec spec;
    spec.init = brs->init;
    for (const auto& r : rules) spec.rules.push_back(r.rule);
    for (const auto& cls : brs->classes) {
        std::vector<std::size_t> idx;
        for (const auto& name : cls)
            for (std::size_t i = 0; i < rules.size(); ++i)
                if (rules[i].rule.name == name) idx.push_back(i);
        std::sort(idx.begin(), idx.end());
        spec.classes.push_back(std::move(idx));
    }
    return spec;
}

Program elaborate(const ProgramAst& ast) {
    Program prog;
    for (const auto& d : ast.controls) {
        if (prog.signature.count(d.name))
            fail(Errc::duplicate_name, "control " + d.name + " declared twice");
        prog.signature[d.name] = Control{d.name, d.arity, d.atomic};
    }

    for (const auto& d : ast.bigs) {
        if (prog.find_bigraph(d.name))
            fail(Errc::duplicate_name, "bigraph " + d.name + " defined twice");
        prog.bigraphs.emplace_back(d.name, elaborate_expr(d.body, prog.signature));
    }

    for (const auto& d : ast.reacts) {
        if (prog.find_rule(d.name))
            fail(Errc::duplicate_name, "rule " + d.name + " defined twice");
        ElabRule er;
        er.rule.name = d.name;
        ElabBigraph redex = elaborate_expr(d.redex, prog.signature, /*forbid_dup_sites=*/true);
        ElabBigraph reactum = elaborate_expr(d.reactum, prog.signature);

        require_solid(redex.value);
        if (redex.value.iface.roots != reactum.value.iface.roots)
            fail(Errc::interface_mismatch,
                 "rule " + d.name + ": redex has " + std::to_string(redex.value.iface.roots) +
                     " regions, reactum " + std::to_string(reactum.value.iface.roots));

        // Balance outer names: pad each side with the other's as idle names,
        // so both expose the same set. Names closed in the redex are gone
        // from its interface and stay unavailable.
        std::set<std::string> all = redex.value.iface.outer_names;
        all.insert(reactum.value.iface.outer_names.begin(),
                   reactum.value.iface.outer_names.end());
        redex.value.iface.outer_names = all;
        reactum.value.iface.outer_names = all;

        for (const auto& sname : reactum.site_names) {
            auto at = std::find(redex.site_names.begin(), redex.site_names.end(), sname);
            if (at == redex.site_names.end())
                fail(Errc::unbound_site,
                     "rule " + d.name + ": reactum site " + sname + " not bound in redex");
            er.rule.eta.push_back(static_cast<int>(at - redex.site_names.begin()));
        }
        er.rule.redex = std::move(redex.value);
        er.rule.reactum = std::move(reactum.value);
        er.redex_sites = std::move(redex.site_names);
        er.reactum_sites = std::move(reactum.site_names);
        er.rule.escalation = d.escalation;
        prog.rules.push_back(std::move(er));
    }

    if (ast.brs) {
        BrsDecl decl;
        decl.init_name = ast.brs->init_name;
        if (ast.brs->init_name) {
            const ElabBigraph* named = prog.find_bigraph(*ast.brs->init_name);
            if (!named)
                fail(Errc::unknown_name, "init bigraph " + *ast.brs->init_name + " not defined");
            decl.init = named->value;
        } else {
            decl.init = elaborate_expr(ast.brs->init_expr, prog.signature).value;
        }
        std::set<std::string> seen;
        for (const auto& cls : ast.brs->classes) {
            for (const auto& name : cls) {
                if (!prog.find_rule(name))
                    fail(Errc::unknown_name, "brs rule " + name + " not defined");
                if (!seen.insert(name).second)
                    fail(Errc::duplicate_name, "rule " + name + " listed twice in brs block");
            }
        }
        decl.classes = ast.brs->classes;
        prog.brs = std::move(decl);
    }
    return prog;
}

Program parse_program(const std::string& source) {
    return elaborate(parse(tokenize(source)));
}

} // namespace sbg::dsl
