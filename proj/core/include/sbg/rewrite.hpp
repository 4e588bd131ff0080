#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sbg/bigraph.hpp"
#include "sbg/match.hpp"

namespace sbg {

// Escalation payload selectors, evaluated over a matched occurrence before
// the rewrite is applied.
struct Selector {
    enum class Kind { labels, count, scope, int_lit, bool_lit };
    Kind kind = Kind::labels;
    std::string control;     // labels/count
    std::int64_t value = 0;  // int_lit
    bool flag = false;       // bool_lit

    friend bool operator==(const Selector&, const Selector&) = default;
};

struct EscalationClause {
    std::string schema;
    std::vector<std::pair<std::string, Selector>> fields; // field name -> selector

    friend bool operator==(const EscalationClause&, const EscalationClause&) = default;
};

struct ReactionRule {
    std::string name;
    Bigraph redex;
    Bigraph reactum;
    std::vector<int> eta; // reactum site -> redex site; may drop or duplicate
    std::optional<EscalationClause> escalation;
};

// Initial state plus prioritized rule classes; an earlier class strictly
// outranks later ones.
struct BrsSpec {
    Bigraph init;
    std::vector<ReactionRule> rules;
    std::vector<std::vector<std::size_t>> classes; // indices into rules
};

struct StepRecord {
    std::size_t index = 0;
    std::string rule;
    std::string occurrence; // canonical summary of the applied occurrence
    std::string state_hash; // canonical hash after the step
};

struct Trace {
    std::vector<StepRecord> steps;
    Bigraph final_state;
    std::string final_hash;
    std::string reason; // "quiescent" | "max_steps"

    std::string to_jsonl() const;
};

// Apply rule at occ. Untouched agent nodes keep their ids; fresh ids are
// allocated only for reactum nodes and duplicated parameters. Throws
// StaleOccurrence when occ does not validate against agent.
Bigraph apply(const Bigraph& agent, const ReactionRule& rule, const Occurrence& occ);

// The deterministic scheduling choice: first priority class with any
// occurrence, minimal (rule definition order, canonical occurrence order).
std::optional<std::pair<std::size_t, Occurrence>> choose_step(const Bigraph& state,
                                                              const BrsSpec& spec);

std::optional<std::pair<Bigraph, StepRecord>> step(const Bigraph& state, const BrsSpec& spec);

Trace run(const BrsSpec& spec, std::size_t max_steps);

// Minimal fixed predicate algebra over states.
struct Predicate {
    enum class Kind { occurs, count, name_linked };
    enum class Cmp { lt, le, eq, ge, gt, ne };
    Kind kind = Kind::occurs;
    Bigraph pattern;        // occurs / count
    Cmp cmp = Cmp::ge;      // count
    std::int64_t bound = 0; // count
    std::string label_x, label_y; // name_linked: labels sharing one link
};

bool check_predicate(const Bigraph& state, const Predicate& pred);

} // namespace sbg
