#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sbg/canon.hpp"
#include "sbg/dot.hpp"
#include "sbg/dsl.hpp"
#include "sbg/match.hpp"
#include "sbg/rewrite.hpp"
#include "sbg/sim.hpp"
#include "sbg/spatial.hpp"

namespace {

constexpr const char* kVersion = "sbg 0.1.0";
constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

namespace fs = std::filesystem;

bool require_file(const std::string& path) {
    if (fs::exists(path)) return true;
    std::cerr << "error: no such file: " << path << "\n";
    return false;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

int cmd_check(const std::string& model) {
    if (!require_file(model)) return kUsageError;
    sbg::dsl::Program prog = sbg::dsl::load_program(model);
    for (const auto& [name, big] : prog.bigraphs) {
        auto rep = sbg::validate(big.value);
        if (!rep.empty()) {
            std::cerr << "error: bigraph " << name << ": " << rep.front().rule << " ("
                      << rep.front().subject << ")\n";
            return kDomainError;
        }
    }
    for (const auto& er : prog.rules) {
        for (const sbg::Bigraph* side : {&er.rule.redex, &er.rule.reactum}) {
            auto rep = sbg::validate(*side);
            if (!rep.empty()) {
                std::cerr << "error: rule " << er.rule.name << ": " << rep.front().rule << "\n";
                return kDomainError;
            }
        }
    }
    std::size_t nrules = prog.rules.size();
    std::size_t nbigs = prog.bigraphs.size();
    std::cout << nrules << (nrules == 1 ? " rule" : " rules") << ", " << nbigs
              << (nbigs == 1 ? " bigraph" : " bigraphs") << "\n";
    return kOk;
}

int cmd_match(const std::string& model, const std::string& agent_name,
              const std::string& rule_name) {
    if (!require_file(model)) return kUsageError;
    sbg::dsl::Program prog = sbg::dsl::load_program(model);
    const sbg::dsl::ElabBigraph* agent = prog.find_bigraph(agent_name);
    if (!agent) {
        std::cerr << "error: unknown bigraph: " << agent_name << "\n";
        return kUsageError;
    }
    const sbg::dsl::ElabRule* rule = prog.find_rule(rule_name);
    if (!rule) {
        std::cerr << "error: unknown rule: " << rule_name << "\n";
        return kUsageError;
    }
    auto occs = sbg::find_occurrences(agent->value, rule->rule.redex);
    std::cout << occs.size() << "\n";
    for (const auto& o : occs) std::cout << o.summary() << "\n";
    return kOk;
}

int cmd_run(const std::string& model, std::size_t max_steps, const std::string& trace_path) {
    if (!require_file(model)) return kUsageError;
    sbg::dsl::Program prog = sbg::dsl::load_program(model);
    sbg::BrsSpec spec = prog.to_brs_spec();
    sbg::Trace tr = sbg::run(spec, max_steps);
    if (!trace_path.empty()) write_file(trace_path, tr.to_jsonl());
    std::cout << "steps=" << tr.steps.size() << " reason=" << tr.reason
              << " hash=" << tr.final_hash << "\n";
    return kOk;
}

// Stand-alone name table: the signature is synthesized from the document
// (category controls plus one atomic control per device type).
int cmd_names(const std::string& scan_path) {
    if (!require_file(scan_path)) return kUsageError;
    sbg::ScanDocument doc = sbg::load_scan(scan_path);
    sbg::Signature sig;
    for (const auto& [cat, ctrl] : sbg::default_category_map()) {
        (void)cat;
        sig[ctrl] = sbg::Control{ctrl, 0, false};
    }
    auto walk = [&](auto&& self, const sbg::ScanDocument& d) -> void {
        for (const auto& dev : d.devices) {
            int arity = static_cast<int>(dev.links.size());
            auto it = sig.find(dev.control);
            if (it == sig.end())
                sig[dev.control] = sbg::Control{dev.control, arity, true};
            else if (it->second.arity != arity)
                sbg::fail(sbg::Errc::arity_mismatch,
                          "device control " + dev.control + " used with " +
                              std::to_string(arity) + " and " +
                              std::to_string(it->second.arity) + " links");
        }
        for (const auto& c : d.children) self(self, c);
    };
    walk(walk, doc);
    sbg::Bigraph world = sbg::ingest_scan(doc, sig);
    std::cout << sbg::names_table(world);
    return kOk;
}

int cmd_simulate(const std::string& dir, const std::string& out_dir) {
    for (const char* name :
         {"model.big", "scan.json", "agents.json", "schemas.json", "events.json", "secret.hex"})
        if (!require_file((fs::path(dir) / name).string())) return kUsageError;
    sbg::SimState st = sbg::load_scenario(dir);
    sbg::SimTrace tr = sbg::run_sim(std::move(st));
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "trace.jsonl").string(), tr.to_jsonl());
    write_file((fs::path(out_dir) / "audit.jsonl").string(), tr.audit_jsonl());
    std::size_t messages = 0;
    for (const auto& r : tr.rounds) messages += r.sent.size();
    std::cout << "rounds=" << tr.rounds.size() << " messages=" << messages
              << " audit=" << tr.audit.size()
              << " chain=" << (sbg::verify_chain(tr.audit) ? "ok" : "broken")
              << " final=" << tr.final_hash << "\n";
    return kOk;
}

int cmd_export_dot(const std::string& model, const std::string& big_name, long steps) {
    if (!require_file(model)) return kUsageError;
    sbg::dsl::Program prog = sbg::dsl::load_program(model);
    sbg::Bigraph target;
    if (!big_name.empty()) {
        const sbg::dsl::ElabBigraph* big = prog.find_bigraph(big_name);
        if (!big) {
            std::cerr << "error: unknown bigraph: " << big_name << "\n";
            return kUsageError;
        }
        target = big->value;
    } else if (steps > 0 || prog.brs) {
        sbg::BrsSpec spec = prog.to_brs_spec();
        target = steps > 0 ? sbg::run(spec, static_cast<std::size_t>(steps)).final_state
                           : spec.init;
    } else if (!prog.bigraphs.empty()) {
        target = prog.bigraphs.front().second.value;
    } else {
        target = sbg::make_empty(prog.signature);
    }
    std::cout << sbg::export_dot(target);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bigraph engine and spatial coordination simulator"};
    app.require_subcommand(0, 1);

    bool quiet = false;
    bool version = false;
    app.add_flag("--quiet", quiet, "suppress diagnostics on standard error");
    app.add_flag("--version", version, "print version to standard error");

    auto* check = app.add_subcommand("check", "parse, elaborate and validate a model");
    std::string check_model;
    check->add_option("model", check_model, "model file (.big)")->required();

    auto* match = app.add_subcommand("match", "count and list redex occurrences");
    std::string match_model, match_agent, match_rule;
    match->add_option("model", match_model)->required();
    match->add_option("--agent", match_agent, "named bigraph to match in")->required();
    match->add_option("--redex", match_rule, "rule whose redex is matched")->required();

    auto* runc = app.add_subcommand("run", "run the model's brs block");
    std::string run_model, run_trace;
    std::size_t run_steps = 1000;
    runc->add_option("model", run_model)->required();
    runc->add_option("--max-steps", run_steps);
    runc->add_option("--trace", run_trace, "trace output path (JSON lines)");

    auto* names = app.add_subcommand("names", "spatial name table from a scan document");
    std::string names_scan;
    names->add_option("scan", names_scan)->required();

    auto* simulate = app.add_subcommand("simulate", "run a scenario bundle");
    std::string sim_dir, sim_out = "sim-out";
    simulate->add_option("scenario", sim_dir, "scenario bundle directory")->required();
    simulate->add_option("--out", sim_out, "output directory");

    auto* dot = app.add_subcommand("export-dot", "render a bigraph as DOT");
    std::string dot_model, dot_big;
    long dot_steps = 0;
    dot->add_option("model", dot_model)->required();
    dot->add_option("--big", dot_big, "named bigraph to render (default: brs init)");
    dot->add_option("--steps", dot_steps, "run this many steps before rendering");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    if (version) {
        std::cerr << kVersion << "\n";
        return kOk;
    }
    if (app.get_subcommands().empty()) {
        if (!quiet) std::cerr << app.help();
        return kUsageError;
    }

    try {
        if (check->parsed()) return cmd_check(check_model);
        if (match->parsed()) return cmd_match(match_model, match_agent, match_rule);
        if (runc->parsed()) return cmd_run(run_model, run_steps, run_trace);
        if (names->parsed()) return cmd_names(names_scan);
        if (simulate->parsed()) return cmd_simulate(sim_dir, sim_out);
        if (dot->parsed()) return cmd_export_dot(dot_model, dot_big, dot_steps);
    } catch (const sbg::Error& e) {
        if (!quiet) std::cerr << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const std::exception& e) {
        if (!quiet) std::cerr << "error: " << e.what() << "\n";
        return kDomainError;
    }
    return kUsageError;
}
