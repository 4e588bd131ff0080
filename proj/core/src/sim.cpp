#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sbg/canon.hpp"
#include "sbg/digest.hpp"
#include "sbg/sim.hpp"

namespace sbg {

using nlohmann::json;

const char* tier_name(Tier t) {
    switch (t) {
    case Tier::leaf: return "leaf";
    case Tier::delegated: return "delegated";
    case Tier::central: return "central";
    }
    return "?";
}

Tier tier_from_string(const std::string& s) {
    if (s == "leaf") return Tier::leaf;
    if (s == "delegated") return Tier::delegated;
    if (s == "central") return Tier::central;
    fail(Errc::validation_error, "unknown tier '" + s + "'");
}

// --- tokens, payloads, audit ---------------------------------------------------

std::string CapabilityToken::canonical_bytes() const {
    json j = {{"agent", agent}, {"expiry", expiry}, {"schemas", schemas}, {"scope", scope}};
    return j.dump();
}

CapabilityToken mint_token(const std::string& agent, const std::string& scope,
                           const std::set<std::string>& schemas, std::int64_t expiry,
                           const std::vector<unsigned char>& secret) {
    CapabilityToken t;
    t.agent = agent;
    t.scope = scope;
    t.schemas = schemas;
    t.expiry = expiry;
    t.signature = hmac_sha256_hex(secret, t.canonical_bytes());
    return t;
}

namespace {

json field_value_json(const FieldValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

json payload_json(const Payload& p) {
    json j = json::object();
    for (const auto& [k, v] : p) j[k] = field_value_json(v);
    return j;
}

bool value_matches_type(const FieldValue& v, FieldType t) {
    switch (t) {
    case FieldType::string_t: return std::holds_alternative<std::string>(v);
    case FieldType::integer_t: return std::holds_alternative<std::int64_t>(v);
    case FieldType::boolean_t: return std::holds_alternative<bool>(v);
    case FieldType::name_list_t: return std::holds_alternative<std::vector<std::string>>(v);
    }
    return false;
}

} // namespace

std::string payload_canonical_bytes(const Payload& p) { return payload_json(p).dump(); }

const char* rejection_name(Rejection r) {
    switch (r) {
    case Rejection::ok: return "ok";
    case Rejection::bad_signature: return "BadSignature";
    case Rejection::expired: return "Expired";
    case Rejection::schema_not_permitted: return "SchemaNotPermitted";
    case Rejection::tier_violation: return "TierViolation";
    case Rejection::schema_mismatch: return "SchemaMismatch";
    case Rejection::hash_mismatch: return "HashMismatch";
    }
    return "?";
}

ValidationOutcome validate_escalation(const EscalationMessage& msg,
                                      const std::map<std::string, SchemaContract>& contracts,
                                      const std::map<std::string, Tier>& tiers,
                                      const std::vector<unsigned char>& secret,
                                      std::int64_t round) {
    if (hmac_sha256_hex(secret, msg.token.canonical_bytes()) != msg.token.signature)
        return {Rejection::bad_signature, ""};
    if (round > msg.token.expiry) return {Rejection::expired, ""};
    if (msg.token.schemas.count(msg.schema) == 0)
        return {Rejection::schema_not_permitted, msg.schema};
    auto from = tiers.find(msg.from);
    auto to = tiers.find(msg.to);
    if (from == tiers.end() || to == tiers.end() || !(to->second > from->second))
        return {Rejection::tier_violation, msg.from + " -> " + msg.to};
    auto contract = contracts.find(msg.schema);
    if (contract == contracts.end()) return {Rejection::schema_mismatch, msg.schema};
    for (const auto& f : contract->second.fields) {
        auto it = msg.payload.find(f.name);
        if (it == msg.payload.end()) return {Rejection::schema_mismatch, f.name};
        if (!value_matches_type(it->second, f.type)) return {Rejection::schema_mismatch, f.name};
    }
    for (const auto& [k, v] : msg.payload) {
        (void)v;
        bool declared = false;
        for (const auto& f : contract->second.fields) declared = declared || f.name == k;
        if (!declared) return {Rejection::schema_mismatch, k};
    }
    if (sha256_hex(payload_canonical_bytes(msg.payload)) != msg.payload_hash)
        return {Rejection::hash_mismatch, ""};
    return {Rejection::ok, ""};
}

std::string audit_record_hash(std::int64_t seq, const std::string& agent,
                              const std::string& payload_hash, const std::string& prev_hash) {
    return sha256_hex(std::to_string(seq) + "|" + agent + "|" + payload_hash + "|" + prev_hash);
}

AuditLog append_audit(AuditLog log, const EscalationMessage& msg) {
    AuditRecord rec;
    rec.seq = static_cast<std::int64_t>(log.size());
    rec.round = msg.round;
    rec.agent = msg.from;
    rec.payload_hash = msg.payload_hash;
    rec.prev_hash = log.empty() ? kZeroHash : log.back().record_hash;
    rec.record_hash = audit_record_hash(rec.seq, rec.agent, rec.payload_hash, rec.prev_hash);
    log.push_back(std::move(rec));
    return log;
}

bool verify_chain(const AuditLog& log) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        const AuditRecord& rec = log[i];
        if (rec.seq != static_cast<std::int64_t>(i)) return false;
        const std::string& expect_prev = i == 0 ? kZeroHash : log[i - 1].record_hash;
        if (rec.prev_hash != expect_prev) return false;
        if (rec.record_hash !=
            audit_record_hash(rec.seq, rec.agent, rec.payload_hash, rec.prev_hash))
            return false;
    }
    return true;
}

// --- scenario loading ------------------------------------------------------------

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::validation_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(slurp(path));
    } catch (const json::exception& e) {
        fail(Errc::validation_error, path + ": " + e.what());
    }
}

FieldType field_type_from_string(const std::string& s) {
    if (s == "string") return FieldType::string_t;
    if (s == "integer") return FieldType::integer_t;
    if (s == "boolean") return FieldType::boolean_t;
    if (s == "name-list") return FieldType::name_list_t;
    fail(Errc::validation_error, "unknown field type '" + s + "'");
}

const char* field_type_name(FieldType t) {
    switch (t) {
    case FieldType::string_t: return "string";
    case FieldType::integer_t: return "integer";
    case FieldType::boolean_t: return "boolean";
    case FieldType::name_list_t: return "name-list";
    }
    return "?";
}

TreeSpec tree_from_json(const json& j) {
    TreeSpec t;
    t.control = j.at("control").get<std::string>();
    if (j.contains("label")) t.label = j.at("label").get<std::string>();
    if (j.contains("links"))
        for (const auto& l : j.at("links")) t.links.push_back(l.get<std::string>());
    if (j.contains("children"))
        for (const auto& c : j.at("children")) t.children.push_back(tree_from_json(c));
    return t;
}

// Contracts every simulation understands; a scenario may redeclare them.
void add_builtin_contracts(std::map<std::string, SchemaContract>& contracts) {
    auto ensure = [&](const std::string& id, std::vector<SchemaField> fields) {
        if (contracts.count(id)) return;
        contracts[id] = SchemaContract{id, std::move(fields)};
    };
    ensure("unknown-state-v1", {{"kind", FieldType::string_t},
                                {"control", FieldType::string_t},
                                {"label", FieldType::string_t}});
    ensure("decision-v1",
           {{"action", FieldType::string_t}, {"confidence_pct", FieldType::integer_t}});
    ensure("scope-violation-v1",
           {{"action", FieldType::string_t}, {"refs", FieldType::name_list_t}});
}

FieldType selector_result_type(const Selector& s) {
    switch (s.kind) {
    case Selector::Kind::labels: return FieldType::name_list_t;
    case Selector::Kind::count: return FieldType::integer_t;
    case Selector::Kind::scope: return FieldType::string_t;
    case Selector::Kind::int_lit: return FieldType::integer_t;
    case Selector::Kind::bool_lit: return FieldType::boolean_t;
    }
    return FieldType::string_t;
}

// Leaf-first containment: `inner` lies within `outer` when outer's segments
// are a suffix of inner's.
bool scope_within(const SpatialName& inner, const SpatialName& outer) {
    if (outer.segments.size() > inner.segments.size()) return false;
    return std::equal(outer.segments.rbegin(), outer.segments.rend(), inner.segments.rbegin());
}

bool scope_within(const std::string& inner, const std::string& outer) {
    return scope_within(SpatialName::parse(inner), SpatialName::parse(outer));
}

} // namespace

Scenario load_scenario_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    Scenario sc;
    sc.program = dsl::load_program((fs::path(dir) / "model.big").string());
    sc.scan = load_scan((fs::path(dir) / "scan.json").string());

    json agents = parse_json_file((fs::path(dir) / "agents.json").string());
    json schemas = parse_json_file((fs::path(dir) / "schemas.json").string());
    json events = parse_json_file((fs::path(dir) / "events.json").string());
    std::string secret_hex = slurp((fs::path(dir) / "secret.hex").string());
    while (!secret_hex.empty() &&
           (secret_hex.back() == '\n' || secret_hex.back() == '\r' || secret_hex.back() == ' '))
        secret_hex.pop_back();
    sc.secret = parse_hex(secret_hex);
    if (sc.secret.empty()) fail(Errc::validation_error, "secret.hex: empty secret");

    try {
        sc.mapping = default_category_map();
        if (agents.contains("mapping"))
            for (const auto& [k, v] : agents.at("mapping").items())
                sc.mapping[k] = v.get<std::string>();
        if (agents.contains("max_local_steps"))
            sc.max_local_steps = agents.at("max_local_steps").get<int>();
        for (const auto& a : agents.at("agents")) {
            AgentSpec spec;
            spec.id = a.at("id").get<std::string>();
            spec.tier = tier_from_string(a.at("tier").get<std::string>());
            spec.scope = a.at("scope").get<std::string>();
            const json& m = a.at("manifest");
            spec.manifest.agent = spec.id;
            spec.manifest.scope = m.at("scope").get<std::string>();
            for (const auto& s : m.at("schemas")) spec.manifest.schemas.insert(s.get<std::string>());
            if (m.contains("privileges"))
                for (const auto& p : m.at("privileges"))
                    spec.manifest.privileges.insert(p.get<std::string>());
            if (a.contains("rules"))
                for (const auto& r : a.at("rules")) spec.rules.push_back(r.get<std::string>());
            if (a.contains("threshold")) spec.threshold = a.at("threshold").get<double>();
            if (a.contains("token_secret_hex"))
                spec.token_secret_hex = a.at("token_secret_hex").get<std::string>();
            if (a.contains("script")) {
                for (const auto& s : a.at("script")) {
                    ScriptEntry e;
                    const json& pat = s.at("match");
                    if (pat.contains("kind")) e.pattern.kind = pat.at("kind").get<std::string>();
                    if (pat.contains("control"))
                        e.pattern.control = pat.at("control").get<std::string>();
                    if (pat.contains("label")) e.pattern.label = pat.at("label").get<std::string>();
                    e.action = s.at("action").get<std::string>();
                    e.confidence = s.at("confidence").get<double>();
                    if (s.contains("refs"))
                        for (const auto& r : s.at("refs")) e.refs.push_back(r.get<std::string>());
                    spec.script.push_back(std::move(e));
                }
            }
            sc.agents.push_back(std::move(spec));
        }

        for (const auto& s : schemas.at("schemas")) {
            SchemaContract c;
            c.id = s.at("id").get<std::string>();
            std::set<std::string> seen;
            for (const auto& f : s.at("fields")) {
                SchemaField sf;
                sf.name = f.at("name").get<std::string>();
                sf.type = field_type_from_string(f.at("type").get<std::string>());
                if (!seen.insert(sf.name).second)
                    fail(Errc::validation_error,
                         "schema " + c.id + ": duplicate field " + sf.name);
                c.fields.push_back(std::move(sf));
            }
            if (sc.contracts.count(c.id))
                fail(Errc::validation_error, "schema " + c.id + " declared twice");
            sc.contracts[c.id] = std::move(c);
        }
        add_builtin_contracts(sc.contracts);

        sc.max_rounds = events.at("max_rounds").get<std::int64_t>();
        if (events.contains("seed")) sc.seed = events.at("seed").get<std::int64_t>();
        if (events.contains("events")) {
            for (const auto& e : events.at("events")) {
                SimEvent ev;
                ev.round = e.at("round").get<std::int64_t>();
                ev.scope = e.at("scope").get<std::string>();
                ev.kind = e.at("kind").get<std::string>();
                if (ev.kind == "insert") {
                    ev.tree = tree_from_json(e.at("tree"));
                } else if (ev.kind == "remove") {
                    ev.label = e.at("label").get<std::string>();
                } else if (ev.kind == "apply") {
                    ev.rule = e.at("rule").get<std::string>();
                } else {
                    fail(Errc::validation_error, "event kind '" + ev.kind + "'");
                }
                sc.events.push_back(std::move(ev));
            }
        }
    } catch (const json::exception& e) {
        fail(Errc::validation_error, std::string("scenario bundle: ") + e.what());
    }
    return sc;
}

SimState load_scenario(const Scenario& scenario) {
    SimState st;
    st.scenario = scenario;
    const Scenario& sc = st.scenario;

    if (sc.agents.empty()) fail(Errc::validation_error, "agents.json: empty agent list");
    if (sc.max_rounds < 0) fail(Errc::validation_error, "events.json: negative max_rounds");

    st.world = ingest_scan(sc.scan, sc.program.signature, sc.mapping);

    std::set<std::string> ids;
    for (const auto& a : sc.agents) {
        if (!ids.insert(a.id).second)
            fail(Errc::validation_error, "agent " + a.id + " declared twice");
        if (a.threshold < 0.0 || a.threshold > 1.0)
            fail(Errc::validation_error, "agent " + a.id + ": threshold outside [0,1]");
        for (const auto& e : a.script) {
            if (e.confidence < 0.0 || e.confidence > 1.0)
                fail(Errc::validation_error, "agent " + a.id + ": confidence outside [0,1]");
            for (const auto& ref : e.refs) {
                try {
                    SpatialName::parse(ref);
                } catch (const Error&) {
                    fail(Errc::validation_error,
                         "agent " + a.id + ": malformed ref '" + ref + "' in decision script");
                }
            }
        }
        try {
            resolve(st.world, a.scope);
        } catch (const Error&) {
            fail(Errc::validation_error, "agent " + a.id + ": scope " + a.scope +
                                             " does not resolve in the ingested scan");
        }
        if (!scope_within(a.scope, a.manifest.scope))
            fail(Errc::validation_error,
                 "agent " + a.id + ": scope " + a.scope + " outside manifest scope " +
                     a.manifest.scope);
        for (const auto& r : a.rules)
            if (!sc.program.find_rule(r))
                fail(Errc::validation_error, "agent " + a.id + ": rule " + r + " not defined");
    }

    // Static schema check: escalation clauses may only emit declared fields,
    // with matching types.
    for (const auto& er : sc.program.rules) {
        if (!er.rule.escalation) continue;
        const auto& clause = *er.rule.escalation;
        auto it = sc.contracts.find(clause.schema);
        if (it == sc.contracts.end())
            fail(Errc::static_schema_violation,
                 "rule " + er.rule.name + ": schema " + clause.schema + " not declared");
        for (const auto& [field, sel] : clause.fields) {
            const SchemaField* declared = nullptr;
            for (const auto& f : it->second.fields)
                if (f.name == field) declared = &f;
            if (!declared)
                fail(Errc::static_schema_violation,
                     "rule " + er.rule.name + ": field " + field + " not in schema " +
                         clause.schema);
            if (declared->type != selector_result_type(sel))
                fail(Errc::static_schema_violation,
                     "rule " + er.rule.name + ": field " + field + " expects " +
                         field_type_name(declared->type));
        }
    }

    // Tokens and the supervision chain.
    for (const auto& a : sc.agents) {
        std::vector<unsigned char> key =
            a.token_secret_hex ? parse_hex(*a.token_secret_hex) : sc.secret;
        st.tokens[a.id] =
            mint_token(a.id, a.manifest.scope, a.manifest.schemas, sc.max_rounds, key);
    }
    for (const auto& a : sc.agents) {
        if (a.tier == Tier::central) continue;
        const AgentSpec* best = nullptr;
        for (const auto& cand : sc.agents) {
            if (cand.tier <= a.tier) continue;
            if (!scope_within(a.scope, cand.scope)) continue;
            if (!best) {
                best = &cand;
                continue;
            }
            auto key = [](const AgentSpec& s) {
                return std::make_tuple(static_cast<int>(s.tier),
                                       -static_cast<int>(SpatialName::parse(s.scope).segments.size()),
                                       s.id);
            };
            if (key(cand) < key(*best)) best = &cand;
        }
        if (best) st.supervisors[a.id] = best->id;
    }
    return st;
}

// --- round execution ---------------------------------------------------------

namespace {

std::map<std::string, Tier> tier_table(const Scenario& sc) {
    std::map<std::string, Tier> t;
    for (const auto& a : sc.agents) t[a.id] = a.tier;
    return t;
}

bool pattern_matches(const EventPattern& pat, const SimEvent& ev) {
    if (pat.kind && *pat.kind != ev.kind) return false;
    std::string control = ev.tree ? ev.tree->control : "";
    std::string label = ev.tree ? ev.tree->label : ev.label;
    if (pat.control && *pat.control != control) return false;
    if (pat.label && *pat.label != label) return false;
    return true;
}

Payload event_descriptor(const SimEvent& ev) {
    Payload p;
    p["kind"] = ev.kind;
    p["control"] = ev.tree ? ev.tree->control : std::string();
    if (ev.kind == "apply")
        p["label"] = ev.rule;
    else
        p["label"] = ev.tree ? ev.tree->label : ev.label;
    return p;
}

// Selector evaluation over the matched occurrence (pre-state), per clause.
Payload evaluate_selectors(const EscalationClause& clause, const Bigraph& state,
                           const Occurrence& occ, const AgentSpec& agent) {
    Payload out;
    std::vector<NodeId> domain;
    for (const auto& [u, v] : occ.node_map) {
        (void)u;
        domain.push_back(v);
    }
    for (const auto& [s, roots] : occ.site_fill) {
        (void)s;
        for (NodeId r : roots)
            for (NodeId d : state.descendants_of(r)) domain.push_back(d);
    }
    std::sort(domain.begin(), domain.end());
    domain.erase(std::unique(domain.begin(), domain.end()), domain.end());

    for (const auto& [field, sel] : clause.fields) {
        switch (sel.kind) {
        case Selector::Kind::labels: {
            std::vector<std::string> labels;
            for (NodeId v : domain) {
                const Node& n = state.node(v);
                if (n.control == sel.control && !n.label.empty()) labels.push_back(n.label);
            }
            std::sort(labels.begin(), labels.end());
            out[field] = labels;
            break;
        }
        case Selector::Kind::count: {
            std::int64_t k = 0;
            for (NodeId v : domain)
                if (state.node(v).control == sel.control) ++k;
            out[field] = k;
            break;
        }
        case Selector::Kind::scope:
            out[field] = agent.scope;
            break;
        case Selector::Kind::int_lit:
            out[field] = sel.value;
            break;
        case Selector::Kind::bool_lit:
            out[field] = sel.flag;
            break;
        }
    }
    return out;
}

struct HandledEvent {
    SimEvent event;
    NodeId target = -1;
};

} // namespace

std::vector<EscalationIntent> evaluate_triggers(const SimState& st, const AgentSpec& agent,
                                                const std::vector<FiredRule>& fired,
                                                const std::vector<SimEvent>& events_in_scope) {
    (void)st;
    std::vector<EscalationIntent> intents;
    // (a) rule-driven
    for (const auto& f : fired) {
        if (!f.clause) continue;
        EscalationIntent in;
        in.kind = "rule-driven";
        in.schema = f.clause->schema;
        in.payload = f.selector_payload;
        intents.push_back(std::move(in));
    }
    bool any_fired = !fired.empty();
    for (const auto& ev : events_in_scope) {
        const ScriptEntry* hit = nullptr;
        for (const auto& entry : agent.script) {
            if (pattern_matches(entry.pattern, ev)) {
                hit = &entry;
                break;
            }
        }
        if (hit) {
            // (d) scope violation is mandatory and pre-empts the
            // confidence gate.
            std::vector<std::string> outside;
            for (const auto& ref : hit->refs)
                if (!scope_within(SpatialName::parse(ref),
                                  SpatialName::parse(agent.manifest.scope)))
                    outside.push_back(ref);
            if (!outside.empty()) {
                EscalationIntent in;
                in.kind = "scope-violation";
                in.schema = "scope-violation-v1";
                in.payload["action"] = hit->action;
                in.payload["refs"] = outside;
                intents.push_back(std::move(in));
                continue;
            }
            // (c) self-assessed uncertainty
            if (hit->confidence < agent.threshold) {
                EscalationIntent in;
                in.kind = "low-confidence";
                in.schema = "decision-v1";
                in.payload["action"] = hit->action;
                in.payload["confidence_pct"] =
                    static_cast<std::int64_t>(std::lround(hit->confidence * 100.0));
                intents.push_back(std::move(in));
            }
            continue;
        }
        // (b) unknown or ambiguous state: nothing matched this round
        if (!any_fired) {
            EscalationIntent in;
            in.kind = "unknown-state";
            in.schema = "unknown-state-v1";
            in.payload = event_descriptor(ev);
            intents.push_back(std::move(in));
        }
    }
    return intents;
}

RoundTrace run_round(SimState& st) {
    ++st.round;
    const Scenario& sc = st.scenario;
    RoundTrace rt;
    rt.round = st.round;
    auto log = [&rt](std::string kind, std::string agent, std::string detail) {
        rt.entries.push_back({rt.round, std::move(kind), std::move(agent), std::move(detail)});
    };
    std::map<std::string, Tier> tiers = tier_table(sc);

    // Phase 1: deliver messages queued in the previous round.
    std::vector<EscalationMessage> inbox = std::move(st.queue);
    st.queue.clear();
    for (const auto& msg : inbox) {
        ValidationOutcome outcome =
            validate_escalation(msg, sc.contracts, tiers, sc.secret, st.round);
        if (outcome.ok()) {
            log("deliver", msg.to,
                msg.intent + " " + msg.schema + " from " + msg.from + " accepted");
        } else {
            std::string why = rejection_name(outcome.reason);
            if (!outcome.detail.empty()) why += "(" + outcome.detail + ")";
            log("reject", msg.to, msg.intent + " " + msg.schema + " from " + msg.from + ": " + why);
        }
    }

    // Phase 2: apply this round's injected sensor events.
    std::vector<HandledEvent> handled;
    for (const auto& ev : sc.events) {
        if (ev.round != st.round) continue;
        try {
            NodeId target = resolve(st.world, ev.scope);
            if (ev.kind == "insert") {
                st.world = insert_tree(st.world, target, *ev.tree);
                log("inject", "", "insert " + ev.tree->control + " at " + ev.scope);
            } else if (ev.kind == "remove") {
                NodeId victim = find_labeled(st.world, target, ev.label);
                st.world = remove_node(st.world, victim);
                log("inject", "", "remove " + ev.label + " at " + ev.scope);
            } else { // apply
                const dsl::ElabRule* rule = sc.program.find_rule(ev.rule);
                if (!rule) fail(Errc::not_found, "rule " + ev.rule);
                ScopedView view = extract_scope(st.world, target);
                auto occs = find_occurrences(view.view, rule->rule.redex);
                if (occs.empty()) {
                    log("inject", "", "apply " + ev.rule + " at " + ev.scope + ": no occurrence");
                } else {
                    view.view = apply(view.view, rule->rule, occs.front());
                    st.world = reattach(st.world, view);
                    log("inject", "", "apply " + ev.rule + " at " + ev.scope);
                }
            }
            handled.push_back({ev, target});
        } catch (const Error& e) {
            log("agent-error", "", "event at " + ev.scope + ": " + e.what());
        }
    }

    // Phase 3: agent turns in ascending (tier, id) order. Scope nodes and
    // event attribution are fixed up front so later rewrites cannot skew
    // them.
    std::vector<const AgentSpec*> order;
    for (const auto& a : sc.agents) order.push_back(&a);
    std::sort(order.begin(), order.end(), [](const AgentSpec* a, const AgentSpec* b) {
        return std::tie(a->tier, a->id) < std::tie(b->tier, b->id);
    });

    std::map<std::string, NodeId> scope_node;
    std::map<std::string, std::set<NodeId>> scope_tree;
    for (const AgentSpec* a : order) {
        try {
            NodeId n = resolve(st.world, a->scope);
            scope_node[a->id] = n;
            auto desc = st.world.descendants_of(n);
            scope_tree[a->id] = std::set<NodeId>(desc.begin(), desc.end());
        } catch (const Error&) {
            // handled on the agent's turn
        }
    }
    // An event belongs to the agent with the deepest scope containing it.
    std::map<std::string, std::vector<SimEvent>> events_for;
    for (const auto& h : handled) {
        const AgentSpec* best = nullptr;
        for (const AgentSpec* a : order) {
            auto it = scope_tree.find(a->id);
            if (it == scope_tree.end() || it->second.count(h.target) == 0) continue;
            auto depth = [](const AgentSpec* s) {
                return SpatialName::parse(s->scope).segments.size();
            };
            if (!best || std::make_tuple(-static_cast<int>(depth(a)), static_cast<int>(a->tier),
                                         a->id) < std::make_tuple(-static_cast<int>(depth(best)),
                                                                  static_cast<int>(best->tier),
                                                                  best->id))
                best = a;
        }
        if (best) events_for[best->id].push_back(h.event);
    }

    for (const AgentSpec* agent : order) {
        auto sn = scope_node.find(agent->id);
        if (sn == scope_node.end()) {
            log("agent-error", agent->id, "scope " + agent->scope + " missing");
            continue;
        }
        if (!scope_within(agent->scope, agent->manifest.scope)) {
            log("agent-error", agent->id, "scope outside manifest");
            continue;
        }
        std::vector<FiredRule> fired;
        try {
            ScopedView view = extract_scope(st.world, sn->second);

            BrsSpec local;
            local.init = view.view;
            std::vector<std::size_t> cls;
            for (const auto& rname : agent->rules) {
                const dsl::ElabRule* er = sc.program.find_rule(rname);
                cls.push_back(local.rules.size());
                local.rules.push_back(er->rule);
            }
            local.classes.push_back(cls);

            Bigraph state = view.view;
            for (int i = 0; i < sc.max_local_steps; ++i) {
                auto choice = choose_step(state, local);
                if (!choice) break;
                const ReactionRule& rule = local.rules[choice->first];
                FiredRule f;
                f.rule = rule.name;
                f.clause = rule.escalation;
                if (rule.escalation)
                    f.selector_payload =
                        evaluate_selectors(*rule.escalation, state, choice->second, *agent);
                state = apply(state, rule, choice->second);
                log("fire", agent->id, rule.name + " [" + choice->second.summary() + "]");
                fired.push_back(std::move(f));
            }
            view.view = std::move(state);
            st.world = reattach(st.world, view);
        } catch (const Error& e) {
            log("agent-error", agent->id, e.what());
            continue;
        }

        std::vector<SimEvent> mine;
        if (auto it = events_for.find(agent->id); it != events_for.end()) mine = it->second;
        // Scripted decisions that clear every gate act locally.
        for (const auto& ev : mine) {
            for (const auto& entry : agent->script) {
                if (!pattern_matches(entry.pattern, ev)) continue;
                bool outside = false;
                for (const auto& ref : entry.refs)
                    outside = outside ||
                              !scope_within(SpatialName::parse(ref),
                                            SpatialName::parse(agent->manifest.scope));
                if (!outside && entry.confidence >= agent->threshold)
                    log("decide", agent->id, entry.action);
                break;
            }
        }

        std::vector<EscalationIntent> intents = evaluate_triggers(st, *agent, fired, mine);
        for (auto& intent : intents) {
            auto sup = st.supervisors.find(agent->id);
            if (sup == st.supervisors.end()) {
                if (agent->tier == Tier::central)
                    log("decide", agent->id, "recorded " + intent.kind + " locally");
                else
                    log("agent-error", agent->id, "no supervisor for " + intent.kind);
                continue;
            }
            EscalationMessage msg;
            msg.from = agent->id;
            msg.to = sup->second;
            msg.round = st.round;
            msg.schema = intent.schema;
            msg.payload = std::move(intent.payload);
            msg.token = st.tokens.at(agent->id);
            msg.payload_hash = sha256_hex(payload_canonical_bytes(msg.payload));
            msg.intent = intent.kind;
            st.audit = append_audit(std::move(st.audit), msg);
            log("send", agent->id, intent.kind + " " + msg.schema + " -> " + msg.to);
            rt.sent.push_back(msg);
            st.queue.push_back(std::move(msg));
        }
    }

    rt.state_hash = canonical_hash(st.world);
    return rt;
}

SimTrace run_sim(SimState st) {
    SimTrace tr;
    for (std::int64_t r = 0; r < st.scenario.max_rounds; ++r) tr.rounds.push_back(run_round(st));
    tr.audit = st.audit;
    tr.final_hash = canonical_hash(st.world);
    return tr;
}

// --- serialization -----------------------------------------------------------

namespace {

json message_json(const EscalationMessage& m) {
    return {{"from", m.from},
            {"to", m.to},
            {"round", m.round},
            {"schema", m.schema},
            {"intent", m.intent},
            {"payload", payload_json(m.payload)},
            {"payload_hash", m.payload_hash},
            {"token",
             {{"agent", m.token.agent},
              {"scope", m.token.scope},
              {"schemas", m.token.schemas},
              {"expiry", m.token.expiry},
              {"signature", m.token.signature}}}};
}

} // namespace

std::string SimTrace::to_jsonl() const {
    std::ostringstream os;
    for (const auto& r : rounds) {
        json entries = json::array();
        for (const auto& e : r.entries)
            entries.push_back({{"kind", e.kind}, {"agent", e.agent}, {"detail", e.detail}});
        json sent = json::array();
        for (const auto& m : r.sent) sent.push_back(message_json(m));
        json line = {{"round", r.round},
                     {"hash", r.state_hash},
                     {"entries", std::move(entries)},
                     {"sent", std::move(sent)}};
        os << line.dump() << "\n";
    }
    json fin = {{"final_hash", final_hash}, {"rounds", rounds.size()}};
    os << fin.dump() << "\n";
    return os.str();
}

std::string SimTrace::audit_jsonl() const {
    std::ostringstream os;
    for (const auto& rec : audit) {
        json line = {{"seq", rec.seq},
                     {"round", rec.round},
                     {"agent", rec.agent},
                     {"payload_hash", rec.payload_hash},
                     {"prev_hash", rec.prev_hash},
                     {"record_hash", rec.record_hash}};
        os << line.dump() << "\n";
    }
    return os.str();
}

} // namespace sbg
