#include "reinfix/cli.hpp"

#include "reinfix/agent.hpp"
#include "reinfix/config.hpp"
#include "reinfix/corpus.hpp"
#include "reinfix/cpg.hpp"
#include "reinfix/error.hpp"
#include "reinfix/ingredient_tools.hpp"
#include "reinfix/retrieval.hpp"
#include "reinfix/session_log.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace reinfix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << text;
}

config::Config load_config(const std::string& path) {
    return path.empty() ? config::Config{} : config::load(path);
}

std::vector<int> parse_budget(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(part, &used));
            if (used != part.size()) out.clear();
        } catch (const std::exception&) {
            out.clear();
        }
        if (out.empty()) break;
    }
    if (out.size() != 3) {
        throw Error(ErrorCode::config_error, "--budget expects attempts,suggestions,patches such as 3,3,5; got " + text);
    }
    return out;
}

bool is_usage_error(ErrorCode code) {
    return code == ErrorCode::config_error || code == ErrorCode::project_not_found || code == ErrorCode::no_sources;
}

struct RepairJob {
    fs::path bug;
    fs::path log;
    fs::path patch_out;
};

struct RepairOutcome {
    std::string verdict;
    std::optional<agent::CandidatePatch> patch;
    std::string log_hash;
};

json patch_json(const validation::BugReport& report, const agent::CandidatePatch& patch) {
    auto j = patch.to_json();
    j["path"] = report.location.path;
    j["start_line"] = report.location.start_line;
    j["end_line"] = report.location.end_line;
    return j;
}

// One repair run. The session_start event carries everything replay needs.
RepairOutcome run_one(const fs::path& project, const validation::BugReport& report, const json& report_json,
                      const config::Config& cfg, llm::LlmBackend& backend, const corpus::TriadStore* store,
                      SessionLog& log) {
    log.append({{"type", "session_start"},
                {"version", std::string(kVersion)},
                {"project", fs::absolute(project).lexically_normal().string()},
                {"report", report_json},
                {"store", cfg.paths.store},
                {"config", cfg.render()}});
    const auto embedder = config::make_embedder(cfg);
    const auto templates = config::make_templates(cfg);
    const auto result =
        agent::repair(report, project, store, *embedder, backend, config::repair_config(cfg), log, templates);
    return {result.plausible ? "PLAUSIBLE" : "NO_PLAUSIBLE_PATCH", result.plausible, log.hash()};
}

validation::BugReport report_from(const json& j, const config::Config& cfg) {
    auto report = validation::BugReport::from_json(j);
    if (!j.contains("timeout_s")) report.suite.timeout_s = cfg.limits.test_timeout_s;
    return report;
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"reinfix: agent-driven program repair over a code property graph"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("reinfix ") + std::string(kVersion) + " (templates " +
                                          templates::TemplateSet::builtin().version() + ")");

    int code = 0;

    // cpg build
    auto* cpg_cmd = app.add_subcommand("cpg", "Code property graph operations")->require_subcommand(1);
    auto* cpg_build = cpg_cmd->add_subcommand("build", "Build the graph of a project and report counts");
    std::string cpg_root, cpg_dump;
    cpg_build->add_option("root", cpg_root, "Project root")->required();
    cpg_build->add_option("--dump", cpg_dump, "Write the canonical JSON graph to this file (- for stdout)");
    cpg_build->callback([&] {
        const auto g = cpg::build_cpg(cpg_root);
        std::size_t errors = 0;
        for (const auto& n : g.nodes()) errors += n.kind == cpg::NodeKind::file && n.parse_error;
        if (cpg_dump == "-") {
            out << g.to_json().dump() << "\n";
        } else {
            if (!cpg_dump.empty()) write_text(cpg_dump, g.to_json().dump() + "\n");
            out << "files " << g.files().size() << " nodes " << g.nodes().size() << " edges " << g.edges().size()
                << " parse_errors " << errors << " hash " << g.content_hash() << "\n";
        }
    });

    // query
    auto* query = app.add_subcommand("query", "Run one ingredient tool against a project");
    std::string tool, q_project;
    std::vector<std::string> q_args;
    bool q_json = false;
    query->add_option("tool", tool, "Tool name")->required();
    query->add_option("--arg", q_args, "Tool argument as name=value (repeatable)");
    query->add_option("--project", q_project, "Project root")->required();
    query->add_flag("--json", q_json, "Print the structured result");
    query->callback([&] {
        if (!tools::find_tool(tool)) {
            std::string names;
            for (const auto& s : tools::registry()) names += " " + s.name;
            throw Error(ErrorCode::config_error, "unknown tool " + tool + "; expected one of:" + names);
        }
        std::map<std::string, std::string> args;
        for (const auto& a : q_args) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::config_error, "--arg expects name=value; got " + a);
            args[a.substr(0, eq)] = a.substr(eq + 1);
        }
        const auto g = cpg::build_cpg(q_project);
        const auto result = tools::invoke(tool, args, g);
        out << (q_json ? result.to_json().dump(2) : result.render()) << "\n";
    });

    // corpus
    auto* corpus_cmd = app.add_subcommand("corpus", "Bug-fix corpus lifecycle")->require_subcommand(1);

    auto* ingest = corpus_cmd->add_subcommand("ingest", "Ingest raw bug-fix pairs into a store");
    std::string ing_in, ing_out;
    ingest->add_option("input", ing_in, "Line-delimited JSON records")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", ing_out, "Store file (created or extended)")->required();
    ingest->callback([&] {
        auto store = fs::exists(ing_out) ? corpus::TriadStore::load(ing_out) : corpus::TriadStore{};
        std::ifstream in(ing_in, std::ios::binary);
        const auto rep = corpus::ingest_jsonl(in, store);
        store.save(ing_out);
        out << "input " << rep.input << " accepted " << rep.accepted << " rejected " << rep.rejected << " (malformed "
            << rep.malformed << ", duplicates " << rep.duplicates << ", identical " << rep.identical << ")\n";
        for (const auto& p : rep.problems) err << "  " << p << "\n";
    });

    auto* label = corpus_cmd->add_subcommand("label", "Label unlabeled triads with a root cause");
    std::string lab_store, lab_cfg;
    int lab_width = 0;
    label->add_option("--store", lab_store, "Store file")->required()->check(CLI::ExistingFile);
    label->add_option("--backend,--config", lab_cfg, "Config file")->required()->check(CLI::ExistingFile);
    label->add_option("--width", lab_width, "Concurrent backend calls")->check(CLI::PositiveNumber);
    label->callback([&] {
        auto cfg = load_config(lab_cfg);
        if (lab_width > 0) cfg.limits.label_width = lab_width;
        cfg.validate();
        auto store = corpus::TriadStore::load(lab_store);
        auto backend = config::make_backend(cfg);
        const auto rep = corpus::label_store(store, *backend, config::make_templates(cfg),
                                             static_cast<std::size_t>(cfg.limits.label_width), cfg.backend.temperature);
        store.save(lab_store);
        out << "labeled " << rep.labeled << " failed " << rep.failed << "\n";
        for (const auto& p : rep.problems) err << "  " << p << "\n";
        if (rep.failed > 0) code = 1;
    });

    auto* filter = corpus_cmd->add_subcommand("filter", "Remove triads that match benchmark snippets");
    std::string fil_bench, fil_store;
    filter->add_option("--benchmark", fil_bench, "Benchmark snippet file")->required()->check(CLI::ExistingFile);
    filter->add_option("--store", fil_store, "Store file")->required()->check(CLI::ExistingFile);
    filter->callback([&] {
        auto store = corpus::TriadStore::load(fil_store);
        const auto removed = corpus::dedup_filter(store, corpus::load_benchmark_snippets(fil_bench));
        store.save(fil_store);
        out << "removed " << removed << " remaining " << store.size() << "\n";
    });

    auto* embed = corpus_cmd->add_subcommand("embed", "Embed labeled triads");
    std::string emb_store, emb_cfg;
    bool emb_fallback = false, emb_refresh = false;
    embed->add_option("--store", emb_store, "Store file")->required()->check(CLI::ExistingFile);
    embed->add_option("--config", emb_cfg, "Config file")->check(CLI::ExistingFile);
    embed->add_flag("--fallback", emb_fallback, "Use the local hashing embedder");
    embed->add_flag("--refresh", emb_refresh, "Re-embed triads that already have a vector");
    embed->callback([&] {
        auto cfg = load_config(emb_cfg);
        if (emb_fallback) cfg.embedder.kind = "fallback";
        auto store = corpus::TriadStore::load(emb_store);
        const auto embedder = config::make_embedder(cfg);
        const auto n = retrieval::embed_store(store, *embedder, cfg.retrieval, emb_refresh);
        store.save(emb_store);
        out << "embedded " << n << " with " << embedder->name() << "\n";
    });

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "Probe the store with a code snippet and cause");
    std::string ret_store, ret_code, ret_cause, ret_cfg;
    std::optional<int> ret_n;
    std::optional<double> ret_threshold;
    bool ret_json = false;
    retrieve->add_option("--store", ret_store, "Store file")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--code", ret_code, "File with the query code")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--cause", ret_cause, "File with the root cause text")->required()->check(CLI::ExistingFile);
    retrieve->add_option("--n", ret_n, "Number of hits");
    retrieve->add_option("--threshold", ret_threshold, "Minimum cosine similarity");
    retrieve->add_option("--config", ret_cfg, "Config file")->check(CLI::ExistingFile);
    retrieve->add_flag("--json", ret_json, "Print hits as JSON");
    retrieve->callback([&] {
        auto cfg = load_config(ret_cfg);
        if (ret_n) cfg.retrieval.top_n = *ret_n;
        if (ret_threshold) cfg.retrieval.threshold = *ret_threshold;
        cfg.retrieval.validate();
        const auto store = corpus::TriadStore::load(ret_store);
        const auto embedder = config::make_embedder(cfg);
        const auto q = retrieval::embed_query(read_text(ret_code), read_text(ret_cause), cfg.retrieval, *embedder);
        const auto hits = retrieval::retrieve(q, store, cfg.retrieval);
        json arr = json::array();
        for (const auto& h : hits) arr.push_back({{"id", h.triad.id}, {"score", h.score}});
        if (ret_json) {
            out << arr.dump(2) << "\n";
        } else {
            if (hits.empty()) out << "no triad reaches the threshold\n";
            for (const auto& h : hits) out << h.triad.id << " " << h.score << "\n";
        }
    });

    // repair
    auto* repair = app.add_subcommand("repair", "Repair one or more bug reports");
    std::string rep_project, rep_store, rep_cfg, rep_budget, rep_log, rep_patch, rep_script;
    std::vector<std::string> rep_bugs;
    int rep_jobs = 1;
    repair->add_option("--project", rep_project, "Project root")->required();
    repair->add_option("--bug", rep_bugs, "Bug report JSON (repeatable)")->required()->check(CLI::ExistingFile);
    repair->add_option("--store", rep_store, "Triad store");
    repair->add_option("--backend,--config", rep_cfg, "Config file")->check(CLI::ExistingFile);
    repair->add_option("--script", rep_script, "Mock script; selects the mock backend")->check(CLI::ExistingFile);
    repair->add_option("--budget", rep_budget, "attempts,suggestions,patches");
    repair->add_option("--log", rep_log, "Session log file (directory when several bugs are given)");
    repair->add_option("--patch-out", rep_patch, "Plausible patch file (directory when several bugs are given)");
    repair->add_option("--jobs", rep_jobs, "Bug reports repaired concurrently")->check(CLI::PositiveNumber);
    repair->callback([&] {
        auto cfg = load_config(rep_cfg);
        if (!rep_script.empty()) {
            cfg.backend.kind = "mock";
            cfg.backend.script = fs::absolute(rep_script).string();
        }
        if (!rep_store.empty()) cfg.paths.store = fs::absolute(rep_store).string();
        if (!rep_budget.empty()) {
            const auto b = parse_budget(rep_budget);
            cfg.budget = {b[0], b[1], b[2]};
        }
        cfg.validate();
        if (!fs::is_directory(rep_project)) {
            throw Error(ErrorCode::project_not_found, "no project directory at " + rep_project);
        }
        std::optional<corpus::TriadStore> store;
        if (!cfg.paths.store.empty()) store = corpus::TriadStore::load(cfg.paths.store);

        std::vector<RepairJob> jobs;
        std::vector<json> report_json;
        std::vector<validation::BugReport> reports;
        for (const auto& bug : rep_bugs) {
            report_json.push_back(read_json(bug));
            reports.push_back(report_from(report_json.back(), cfg));
            RepairJob job{bug, rep_log, rep_patch};
            if (rep_bugs.size() > 1) {
                const auto stem = fs::path(bug).stem().string();
                if (!rep_log.empty()) job.log = fs::path(rep_log) / (stem + ".jsonl");
                if (!rep_patch.empty()) job.patch_out = fs::path(rep_patch) / (stem + ".patch.json");
            }
            jobs.push_back(job);
        }

        std::vector<std::optional<RepairOutcome>> outcomes(jobs.size());
        std::vector<std::string> failures(jobs.size());
        std::atomic<std::size_t> next{0};
        std::mutex out_mu;
        auto worker = [&] {
            for (std::size_t i = next++; i < jobs.size(); i = next++) {
                SessionLog log;
                try {
                    auto backend = config::make_backend(cfg);
                    outcomes[i] = run_one(rep_project, reports[i], report_json[i], cfg, *backend,
                                          store ? &*store : nullptr, log);
                    if (!jobs[i].patch_out.empty() && outcomes[i]->patch) {
                        write_text(jobs[i].patch_out, patch_json(reports[i], *outcomes[i]->patch).dump(2) + "\n");
                    }
                } catch (const Error& e) {
                    failures[i] = std::string(to_string(e.code())) + ": " + e.detail();
                }
                if (!jobs[i].log.empty()) log.save(jobs[i].log);
                std::lock_guard lock(out_mu);
                out << jobs[i].bug.string() << ": "
                    << (outcomes[i] ? outcomes[i]->verdict : "ERROR " + failures[i]) << "\n";
            }
        };
        const auto width = std::min<std::size_t>(static_cast<std::size_t>(rep_jobs), jobs.size());
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < width; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (!outcomes[i] || !outcomes[i]->patch) code = 1;
        }
    });

    // replay
    auto* replay = app.add_subcommand("replay", "Re-run a recorded session with its recorded completions");
    std::string rp_log, rp_out;
    replay->add_option("log", rp_log, "Session log")->required()->check(CLI::ExistingFile);
    replay->add_option("--log-out", rp_out, "Write the replayed session log here");
    replay->callback([&] {
        const auto recorded = SessionLog::load(rp_log);
        const auto starts = recorded.of_type("session_start");
        if (starts.empty()) throw Error(ErrorCode::config_error, rp_log + " has no session_start event");
        const auto& start = starts.front();
        auto cfg = config::parse(start.at("config").get<std::string>());
        std::vector<llm::ScriptEntry> script;
        for (const auto& e : recorded.of_type("llm_response")) {
            llm::ScriptEntry entry;
            entry.response = e.at("text").get<std::string>();
            script.push_back(std::move(entry));
        }
        llm::MockBackend backend(std::move(script));
        std::optional<corpus::TriadStore> store;
        if (!cfg.paths.store.empty()) store = corpus::TriadStore::load(cfg.paths.store);
        const auto& report_json = start.at("report");
        SessionLog log;
        const auto outcome = run_one(start.at("project").get<std::string>(), report_from(report_json, cfg),
                                     report_json, cfg, backend, store ? &*store : nullptr, log);
        if (!rp_out.empty()) log.save(rp_out);

        const auto recorded_outcomes = recorded.of_type("outcome");
        const auto replayed = log.of_type("outcome");
        const bool same_outcome = !recorded_outcomes.empty() && !replayed.empty() &&
                                  recorded_outcomes.back() == replayed.back();
        const bool same_log = recorded.hash() == outcome.log_hash;
        out << "verdict " << outcome.verdict << "\n"
            << "outcome " << (same_outcome ? "matches" : "differs") << "\n"
            << "log " << (same_log ? "identical" : "differs") << "\n";
        if (!same_outcome) code = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.detail() << "\n";
        return is_usage_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}

}  // namespace reinfix::cli
