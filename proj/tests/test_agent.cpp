#include <doctest.h>

#include "reinfix/agent.hpp"
#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "scenarios.hpp"

using namespace reinfix;
using namespace reinfix::agent;
using scenario::any;
using scenario::on;

namespace {

const templates::TemplateSet& tpl() { return templates::TemplateSet::builtin(); }

std::vector<std::string> types(const SessionLog& log) {
    std::vector<std::string> out;
    for (const auto& e : log.events()) out.push_back(e["type"]);
    return out;
}

std::size_t index_of(const std::vector<std::string>& v, const std::string& x, std::size_t from = 0) {
    for (std::size_t i = from; i < v.size(); ++i) {
        if (v[i] == x) return i;
    }
    return v.size();
}

struct Run {
    SessionLog log;
    RepairResult result;
};

Run run_mini(const scenario::MiniProject& p, std::vector<llm::ScriptEntry> script, RepairConfig cfg = {},
             const corpus::TriadStore* store = nullptr) {
    llm::MockBackend backend(std::move(script));
    retrieval::FallbackEmbedder embedder;
    Run r;
    r.result = repair(p.report, p.root(), store, embedder, backend, cfg, r.log);
    return r;
}

}  // namespace

TEST_CASE("two-step gathering on the control-flow fixture") {
    const auto report = validation::BugReport::load(fixture("closure14") / "bug.json");
    auto project = cpg::open_project(fixture("closure14") / "project");
    llm::MockBackend backend({
        on("cause-analysis", "Thought: the edge label matters.\nROOT CAUSE: NONE"),
        on("gather", "Thought: where is Branch declared?\nAction: find_class_loc\nAction Input: className=Branch"),
        on("gather", "Thought: which labels exist?\nAction: identify_class\nAction Input: className=Branch"),
        on("gather", "Thought: ON_EX exists.\nFinal Answer: The finally edge uses Branch.UNCOND instead of Branch.ON_EX."),
    });
    SessionLog log;
    Session session(backend, log, tpl());
    const auto r = run_reasoning_phase(report, project, session, {});
    REQUIRE(r.root_cause);
    CHECK(*r.root_cause == "The finally edge uses Branch.UNCOND instead of Branch.ON_EX.");
    CHECK(r.trace.tool_calls == 2);
    REQUIRE(r.trace.donor_code.size() == 2);
    CHECK(r.trace.donor_code[0].render().find("ControlFlowGraph.java") != std::string::npos);
    CHECK(r.trace.donor_code[1].render().find("ON_EX") != std::string::npos);
    CHECK(r.trace.steps.size() == 4);
    CHECK(session.backend_calls() == 4);
    CHECK(project.is_open());

    // The second gather prompt carries the first observation.
    const auto requests = log.of_type("llm_request");
    REQUIRE(requests.size() == 4);
    CHECK(requests[2]["prompt"].get<std::string>().find("ControlFlowGraph.java") != std::string::npos);
    CHECK(requests[1]["prompt"].get<std::string>().find("(none yet)") != std::string::npos);
}

TEST_CASE("immediate cause needs no tools") {
    const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
    auto project = cpg::open_project(fixture("maxmin") / "project");
    llm::MockBackend backend({any("Final Answer: max compares the wrong way.")});
    SessionLog log;
    Session session(backend, log, tpl());
    const auto r = run_reasoning_phase(report, project, session, {});
    CHECK(r.root_cause == "max compares the wrong way.");
    CHECK(r.trace.tool_calls == 0);
    CHECK(log.count("tool_call") == 0);
    CHECK(session.backend_calls() == 1);
}

TEST_CASE("always NONE stops after the gather limit") {
    const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
    for (int g : {1, 3, 5, 8}) {
        CAPTURE(g);
        auto project = cpg::open_project(fixture("maxmin") / "project");
        llm::MockBackend backend({any("Thought: unsure.\nROOT CAUSE: NONE", true)});
        SessionLog log;
        Session session(backend, log, tpl());
        const auto r = run_reasoning_phase(report, project, session, {.max_gather_cycles = g});
        CHECK_FALSE(r.root_cause);
        CHECK(session.backend_calls() == static_cast<std::size_t>(1 + g));
        CHECK(log.of_type("llm_request").back()["purpose"] == "gather");
        CHECK(log.count("cause_not_found") == 1);
        CHECK_FALSE(project.is_open());
    }
}

TEST_CASE("tool limit and initial tool calls") {
    const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
    auto project = cpg::open_project(fixture("maxmin") / "project");
    llm::MockBackend backend({
        on("cause-analysis", "Action: get_imports\nAction Input: fileName=MathUtil.java"),
        on("gather", "Action: find_method_in_file\nAction Input: methodName=max, fileName=MathUtil.java", true),
    });
    SessionLog log;
    Session session(backend, log, tpl());
    const auto r = run_reasoning_phase(report, project, session, {.max_gather_cycles = 6, .max_react_steps = 2});
    CHECK_FALSE(r.root_cause);
    CHECK(r.trace.tool_calls == 2);
    CHECK(log.count("tool_call") == 2);
    // Identical observations are kept once.
    CHECK(r.trace.donor_code.size() == 1);
    CHECK(session.backend_calls() == 7);
}

TEST_CASE("malformed replies get a correction and eventually give up") {
    const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
    auto project = cpg::open_project(fixture("maxmin") / "project");
    llm::MockBackend backend({on("cause-analysis", "ROOT CAUSE: NONE"), on("gather", "gibberish", true)});
    SessionLog log;
    Session session(backend, log, tpl());
    const auto r = run_reasoning_phase(report, project, session, {});
    CHECK_FALSE(r.root_cause);
    CHECK(session.backend_calls() == 4);
    const auto requests = log.of_type("llm_request");
    CHECK(requests[1]["prompt"].get<std::string>().find("could not be used") == std::string::npos);
    CHECK(requests[2]["prompt"].get<std::string>().find("could not be used") != std::string::npos);

    // A good reply resets the streak.
    auto again = cpg::open_project(fixture("maxmin") / "project");
    llm::MockBackend mixed({on("cause-analysis", "ROOT CAUSE: NONE"), on("gather", "??"), on("gather", "??"),
                            on("gather", "Thought: hmm"), on("gather", "??"), on("gather", "Final Answer: found it")});
    SessionLog log2;
    Session s2(mixed, log2, tpl());
    CHECK(run_reasoning_phase(report, again, s2, {}).root_cause == "found it");
}

TEST_CASE("budget ceiling and call bound") {
    const scenario::MiniProject p;
    for (const auto& [a, s, n] : std::vector<std::tuple<int, int, int>>{{3, 3, 5}, {1, 2, 2}, {2, 1, 4}}) {
        RepairConfig cfg;
        cfg.budget = {a, s, n};
        auto run = run_mini(p, scenario::fixed_reply_script(s + 2, scenario::kMiniWrong), cfg);
        CHECK_FALSE(run.result.plausible);
        CHECK(run.result.candidates == static_cast<std::size_t>(a * s * n));
        CHECK(run.result.candidates <= static_cast<std::size_t>(cfg.budget.max_candidates()));
        CHECK(run.log.count("candidate") == run.result.candidates);
        CHECK(run.log.count("validation") == run.result.candidates);
        CHECK(run.log.count("llm_request") == run.result.backend_calls);
        CHECK(run.result.backend_calls <= backend_call_bound(cfg.budget, cfg.limits));
        for (const auto& sug : run.log.of_type("suggestions")) CHECK(sug["items"].size() == static_cast<std::size_t>(s));
        CHECK(run.log.events().back()["verdict"] == "NO_PLAUSIBLE_PATCH");
    }
    CHECK(backend_call_bound({}, {}) == 3 * (1 + 5 + 1 + 3 * 6));
    CHECK(RepairBudget{}.max_candidates() == 45);
}

TEST_CASE("early stop after the first plausible candidate") {
    const scenario::MiniProject p;
    std::vector<llm::ScriptEntry> script = {on("cause-analysis", "Final Answer: f subtracts."),
                                            on("suggestions", "Final Answer: f subtracts.\n1. add\n2. increment\n3. other")};
    for (int i = 0; i < 7; ++i) script.push_back(on("patch", scenario::fenced(scenario::kMiniWrong)));
    script.push_back(on("patch", scenario::fenced(scenario::kMiniFixed)));
    script.push_back(on("patch", scenario::fenced(scenario::kMiniWrong), true));

    for (std::size_t width : {1u, 3u}) {
        RepairConfig cfg;
        cfg.validation.width = width;
        auto run = run_mini(p, script, cfg);
        REQUIRE(run.result.plausible);
        CHECK(run.result.plausible->new_body == scenario::kMiniFixed);
        CHECK(run.result.plausible->suggestion_index == 2);
        CHECK(run.result.plausible->patch_index == 3);
        CHECK(run.result.attempts.size() == 1);
        const auto t = types(run.log);
        const auto plausible_at = [&] {
            for (std::size_t i = 0; i < run.log.events().size(); ++i) {
                if (run.log.events()[i].value("verdict", "") == "PLAUSIBLE") return i;
            }
            return t.size();
        }();
        REQUIRE(plausible_at < t.size());
        CHECK(index_of(t, "llm_request", plausible_at) == t.size());
        CHECK(t.back() == "outcome");
        if (width == 1) {
            CHECK(run.result.candidates == 8);
            CHECK(run.result.backend_calls == 10);
        } else {
            CHECK(run.result.candidates == 8);  // batches end with each suggestion
        }
    }
}

TEST_CASE("phase ordering in the log") {
    const scenario::MiniProject p;
    auto run = run_mini(p, scenario::fixed_reply_script(3, scenario::kMiniWrong), RepairConfig{.budget = {2, 2, 2}});
    const auto t = types(run.log);
    const auto second = index_of(t, "attempt_start", index_of(t, "attempt_start") + 1);
    REQUIRE(second < t.size());
    for (const auto& [from, to] : std::vector<std::pair<std::size_t, std::size_t>>{{0, second}, {second, t.size()}}) {
        const auto cause = index_of(t, "root_cause", from);
        const auto retrieval = index_of(t, "retrieval", from);
        const auto sugg = index_of(t, "suggestions", from);
        std::size_t first_patch = t.size();
        for (std::size_t i = from; i < to && first_patch == t.size(); ++i) {
            if (t[i] == "llm_request" && run.log.events()[i]["purpose"] == "patch") first_patch = i;
        }
        CHECK(cause < retrieval);
        CHECK(retrieval < sugg);
        CHECK(sugg < first_patch);
        CHECK(first_patch < to);
    }
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(run.log.events()[i]["seq"] == i);
}

TEST_CASE("session logs are deterministic") {
    const scenario::MiniProject p;
    std::set<std::string> hashes;
    for (int i = 0; i < 3; ++i) {
        hashes.insert(run_mini(p, scenario::fixed_reply_script(3, scenario::kMiniWrong), RepairConfig{.budget = {2, 2, 3}})
                          .log.hash());
    }
    CHECK(hashes.size() == 1);
}

TEST_CASE("a failed attempt does not leak into the next") {
    const scenario::MiniProject p;
    auto run = run_mini(p,
                        {on("cause-analysis", "ROOT CAUSE: NONE", true), on("gather", "ROOT CAUSE: NONE"),
                         on("gather", "ROOT CAUSE: NONE"), on("gather", "ROOT CAUSE: NONE"), on("gather", "ROOT CAUSE: NONE"),
                         on("gather", "ROOT CAUSE: NONE"), on("gather", "Final Answer: f subtracts."),
                         on("suggestions", "Final Answer: f subtracts.\n1. add"),
                         on("patch", scenario::fenced(scenario::kMiniFixed))},
                        RepairConfig{.budget = {2, 1, 1}});
    REQUIRE(run.result.attempts.size() == 2);
    CHECK(run.result.attempts[0].failure == ErrorCode::cause_not_found);
    CHECK(run.result.attempts[0].trace.steps.size() == 6);
    CHECK(run.result.attempts[1].trace.root_cause == "f subtracts.");
    CHECK(run.result.attempts[1].trace.donor_code.empty());
    CHECK(run.result.plausible);
    CHECK(run.result.plausible->attempt == 2);
    const auto gathers = run.log.of_type("llm_request");
    CHECK(gathers[6]["attempt"] == 2);
    CHECK(gathers[7]["purpose"] == "gather");
    CHECK(gathers[7]["prompt"].get<std::string>().find("(none yet)") != std::string::npos);
}

TEST_CASE("all-NONE repair spends exactly the reasoning budget") {
    const scenario::MiniProject p;
    RepairConfig cfg;
    auto run = run_mini(p, {any("ROOT CAUSE: NONE", true)}, cfg);
    CHECK_FALSE(run.result.plausible);
    CHECK(run.result.backend_calls == 3 * (1 + 5));
    CHECK(run.log.count("cause_not_found") == 3);
    CHECK(run.log.count("retrieval") == 0);
    CHECK(run.result.candidates == 0);
}

TEST_CASE("suggestion and patch re-prompts") {
    const scenario::MiniProject p;
    {
        auto run = run_mini(p, {on("cause-analysis", "Final Answer: c"), on("suggestions", "nonsense", true)},
                            RepairConfig{.budget = {1, 3, 2}});
        CHECK(run.log.count("llm_request") == 1 + 3);
        CHECK(run.result.candidates == 0);
    }
    {
        auto run = run_mini(p, {on("cause-analysis", "Final Answer: c"), on("suggestions", "nonsense", true)},
                            RepairConfig{.budget = {1, 1, 2}});
        CHECK(run.log.count("llm_request") == 1 + 1);
    }
    {
        auto run = run_mini(p,
                            {on("cause-analysis", "Final Answer: c"), on("suggestions", "Thought: no"),
                             on("suggestions", "Final Answer: c\n1. a\n2. b"), on("patch", "no code here", true)},
                            RepairConfig{.budget = {1, 2, 5}});
        CHECK(run.log.of_type("suggestions")[0]["items"].size() == 2);
        // Three replies without a code block end each suggestion.
        CHECK(run.log.count("llm_request") == 1 + 2 + 3 + 3);
        CHECK(run.result.candidates == 0);
    }
}

TEST_CASE("retrieval in the solution phase") {
    const scenario::MiniProject p;
    retrieval::FallbackEmbedder embedder;
    retrieval::RetrievalConfig rcfg;
    std::string seed;
    const auto store = scenario::maxmin_store(embedder, rcfg, &seed);
    {
        llm::MockBackend backend(scenario::fixed_reply_script(1, scenario::kMiniWrong));
        SessionLog log;
        Session session(backend, log, tpl());
        const auto out = run_solution_phase(p.report, "f subtracts", nullptr, rcfg, embedder, session, {1, 1, 1});
        CHECK(out.patterns.empty());
        CHECK(log.of_type("retrieval")[0]["warning"] == "EMPTY_STORE");
        CHECK(out.suggestions.size() == 1);
        CHECK(log.of_type("llm_request")[0]["prompt"].get<std::string>().find("no similar past fixes") !=
              std::string::npos);
    }
    {
        const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
        llm::MockBackend backend(scenario::fixed_reply_script(1, scenario::kMiniWrong));
        SessionLog log;
        Session session(backend, log, tpl());
        const auto out = run_solution_phase(report, scenario::kMaxminCause, &store, rcfg, embedder, session, {1, 1, 1});
        REQUIRE_FALSE(out.patterns.empty());
        CHECK(out.patterns[0].triad.id == seed);
        CHECK(log.of_type("llm_request")[0]["prompt"].get<std::string>().find("return a > b ? a : b;") !=
              std::string::npos);
    }
    {
        auto strict = rcfg;
        strict.threshold = 1.0;
        llm::MockBackend backend(scenario::fixed_reply_script(2, scenario::kMiniWrong));
        SessionLog log;
        Session session(backend, log, tpl());
        const auto out = run_solution_phase(p.report, "f subtracts", &store, strict, embedder, session, {1, 2, 1});
        CHECK(out.patterns.empty());
        CHECK(out.suggestions.size() == 2);
        CHECK(out.candidates.size() == 2);
    }
}

TEST_CASE("maxmin end to end") {
    const auto report = validation::BugReport::load(fixture("maxmin") / "bug.json");
    retrieval::FallbackEmbedder embedder;
    RepairConfig cfg;
    std::string seed;
    const auto store = scenario::maxmin_store(embedder, cfg.retrieval, &seed);
    llm::MockBackend backend(scenario::maxmin_script());
    SessionLog log;
    const auto r = repair(report, fixture("maxmin") / "project", &store, embedder, backend, cfg, log);
    REQUIRE(r.plausible);
    CHECK(r.plausible->new_body.find("a > b") != std::string::npos);
    CHECK(log.count("tool_call") == 1);
    CHECK(log.of_type("retrieval")[0]["hits"][0]["id"] == seed);
    CHECK(backend.remaining() == 0);
}
