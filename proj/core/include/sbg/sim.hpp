#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sbg/bigraph.hpp"
#include "sbg/dsl.hpp"
#include "sbg/rewrite.hpp"
#include "sbg/spatial.hpp"

namespace sbg {

enum class Tier { leaf = 0, delegated = 1, central = 2 };

const char* tier_name(Tier t);
Tier tier_from_string(const std::string& s);

// Declares an agent's spatial and semantic authority.
struct PolicyManifest {
    std::string agent;
    std::string scope; // spatial name the authority is rooted at
    std::set<std::string> schemas;
    std::set<std::string> privileges;
};

// Pattern over injected event descriptors; present fields must match.
struct EventPattern {
    std::optional<std::string> kind;
    std::optional<std::string> control;
    std::optional<std::string> label;
};

// One scripted decision: the stand-in for model inference. `refs` name the
// resources the decision would touch; confidence is self-assessed.
struct ScriptEntry {
    EventPattern pattern;
    std::string action;
    double confidence = 1.0;
    std::vector<std::string> refs;
};

struct AgentSpec {
    std::string id;
    Tier tier = Tier::leaf;
    std::string scope;
    PolicyManifest manifest;
    std::vector<std::string> rules; // distributed rule names, in order
    std::vector<ScriptEntry> script;
    double threshold = 0.5; // escalate decisions below this confidence
    std::optional<std::string> token_secret_hex; // mint with an alternate secret
};

enum class FieldType { string_t, integer_t, boolean_t, name_list_t };

struct SchemaField {
    std::string name;
    FieldType type = FieldType::string_t;
};

struct SchemaContract {
    std::string id;
    std::vector<SchemaField> fields;
};

struct CapabilityToken {
    std::string agent;
    std::string scope;
    std::set<std::string> schemas;
    std::int64_t expiry = 0; // last round the token is valid for
    std::string signature;   // HMAC-SHA-256 over canonical token bytes

    std::string canonical_bytes() const;
};

CapabilityToken mint_token(const std::string& agent, const std::string& scope,
                           const std::set<std::string>& schemas, std::int64_t expiry,
                           const std::vector<unsigned char>& secret);

// Payload values mirror the schema field types.
using FieldValue = std::variant<std::string, std::int64_t, bool, std::vector<std::string>>;
using Payload = std::map<std::string, FieldValue>;

std::string payload_canonical_bytes(const Payload& p);

struct EscalationMessage {
    std::string from;
    std::string to;
    std::int64_t round = 0;     // round the message was sent
    std::string schema;
    Payload payload;
    CapabilityToken token;
    std::string payload_hash;   // SHA-256 of canonical payload bytes
    std::string intent;         // rule-driven | unknown-state | low-confidence | scope-violation
};

enum class Rejection {
    ok,
    bad_signature,
    expired,
    schema_not_permitted,
    tier_violation,
    schema_mismatch,
    hash_mismatch,
};

const char* rejection_name(Rejection r);

struct ValidationOutcome {
    Rejection reason = Rejection::ok;
    std::string detail; // offending field for schema_mismatch
    bool ok() const { return reason == Rejection::ok; }
};

// Checks in order: token signature, token expiry against the round, schema
// permitted by the token, recipient tier strictly higher, payload fields and
// types exactly per contract, payload hash.
ValidationOutcome validate_escalation(const EscalationMessage& msg,
                                      const std::map<std::string, SchemaContract>& contracts,
                                      const std::map<std::string, Tier>& tiers,
                                      const std::vector<unsigned char>& secret,
                                      std::int64_t round);

struct AuditRecord {
    std::int64_t seq = 0;
    std::int64_t round = 0;
    std::string agent;
    std::string payload_hash;
    std::string prev_hash;   // 64 zero chars for record 0
    std::string record_hash; // SHA-256(seq || agent || payload_hash || prev_hash)
};

std::string audit_record_hash(std::int64_t seq, const std::string& agent,
                              const std::string& payload_hash, const std::string& prev_hash);

using AuditLog = std::vector<AuditRecord>;

AuditLog append_audit(AuditLog log, const EscalationMessage& msg);
bool verify_chain(const AuditLog& log);

// Injected sensor events.
struct SimEvent {
    std::int64_t round = 0;
    std::string scope;              // spatial name of the target node
    std::string kind;               // insert | remove | apply
    std::optional<TreeSpec> tree;   // insert
    std::string label;              // remove
    std::string rule;               // apply
};

struct Scenario {
    dsl::Program program;
    ScanDocument scan;
    CategoryMap mapping;
    std::vector<AgentSpec> agents;
    std::map<std::string, SchemaContract> contracts;
    std::vector<unsigned char> secret;
    std::vector<SimEvent> events;
    std::int64_t max_rounds = 0;
    std::int64_t seed = 0;
    int max_local_steps = 100;
};

// Everything a round of simulation may log.
struct SimLogEntry {
    std::int64_t round = 0;
    std::string kind;   // inject | fire | decide | send | deliver | reject | agent-error
    std::string agent;  // "" for scenario-level entries
    std::string detail;
};

struct RoundTrace {
    std::int64_t round = 0;
    std::vector<SimLogEntry> entries;
    std::vector<EscalationMessage> sent;
    std::string state_hash;
};

struct SimTrace {
    std::vector<RoundTrace> rounds;
    AuditLog audit;
    std::string final_hash;

    std::string to_jsonl() const;   // trace file body
    std::string audit_jsonl() const; // audit log file body
};

struct SimState {
    Scenario scenario;
    Bigraph world;
    std::map<std::string, CapabilityToken> tokens;      // agent -> token
    std::map<std::string, std::string> supervisors;     // agent -> nearest higher tier
    std::vector<EscalationMessage> queue;               // pending delivery
    AuditLog audit;
    std::int64_t round = 0;
};

// Load and cross-validate a scenario bundle directory: model.big, scan.json,
// agents.json, schemas.json, events.json, secret.hex. Distributes rules,
// statically checks escalation clauses against their schemas, mints tokens.
Scenario load_scenario_dir(const std::string& dir);
SimState load_scenario(const Scenario& scenario);
inline SimState load_scenario(const std::string& dir) {
    return load_scenario(load_scenario_dir(dir));
}

// Escalation intents produced by the four triggers before they become
// messages.
struct EscalationIntent {
    std::string kind; // rule-driven | unknown-state | low-confidence | scope-violation
    std::string schema;
    Payload payload;
};

// Summary of one local rule application, for trigger evaluation.
struct FiredRule {
    std::string rule;
    std::optional<EscalationClause> clause;
    Payload selector_payload; // clause selectors evaluated over the occurrence
};

// Trigger evaluation for one agent turn: (a) fired rules with escalation
// clauses, then per event in its scope, (b) unknown state when nothing
// matched, (c) low confidence, (d) scope violations (mandatory).
std::vector<EscalationIntent> evaluate_triggers(const SimState& st, const AgentSpec& agent,
                                                const std::vector<FiredRule>& fired,
                                                const std::vector<SimEvent>& events_in_scope);

// One synchronous round: deliver queued messages, apply this round's
// injected events, then let each agent (ascending tier, id) run its rules to
// local quiescence over its scoped view and evaluate triggers.
RoundTrace run_round(SimState& st);

SimTrace run_sim(SimState st);
inline SimTrace run_sim(const std::string& dir) { return run_sim(load_scenario(dir)); }

} // namespace sbg
