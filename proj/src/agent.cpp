#include "reinfix/agent.hpp"

#include <sstream>

namespace reinfix::agent {

namespace {

std::string join_lines(const std::vector<std::string>& items, const std::string& empty) {
    if (items.empty()) return empty;
    std::string out;
    for (const auto& s : items) out += s + "\n";
    out.pop_back();
    return out;
}

std::string tool_list() {
    std::vector<std::string> out;
    for (const auto& spec : tools::registry()) {
        std::string params;
        for (const auto& p : spec.params) params += (params.empty() ? "" : ", ") + p;
        out.push_back("- " + spec.name + "(" + params + "): " + spec.description);
    }
    return join_lines(out, "");
}

std::map<std::string, std::string> report_vars(const BugReport& report) {
    return {{"path", report.location.path},
            {"start_line", std::to_string(report.location.start_line)},
            {"end_line", std::to_string(report.location.end_line)},
            {"buggy_code", report.buggy_code},
            {"failure_info", report.failure_info}};
}

std::string correction_text(const templates::TemplateSet& t, const std::optional<std::string>& reason) {
    return reason ? t.render("correction", {{"reason", *reason}}) : std::string();
}

nlohmann::json args_json(const llm::Args& args) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [k, v] : args) j.push_back({k, v});
    return j;
}

std::string describe_step(const Step& s) {
    if (s.action) {
        std::string args;
        for (const auto& [k, v] : s.action->args) args += (args.empty() ? "" : ", ") + k + "=" + v;
        return "Action: " + s.action->tool + "(" + args + ")";
    }
    return s.thought;
}

}  // namespace

void RepairBudget::validate() const {
    if (attempts < 1 || suggestions_per_attempt < 1 || patches_per_suggestion < 1) {
        throw Error(ErrorCode::config_error, "budget values must be positive");
    }
}

void AgentLimits::validate() const {
    if (max_gather_cycles < 1 || max_react_steps < 1 || max_malformed_streak < 1) {
        throw Error(ErrorCode::config_error, "agent limits must be positive");
    }
}

std::size_t backend_call_bound(const RepairBudget& b, const AgentLimits& l) {
    const auto s = static_cast<std::size_t>(b.suggestions_per_attempt);
    const auto p = static_cast<std::size_t>(b.patches_per_suggestion);
    return static_cast<std::size_t>(b.attempts) * (1 + static_cast<std::size_t>(l.max_gather_cycles) + 1 + s * (1 + p));
}

Session::Session(llm::LlmBackend& backend, SessionLog& log, const templates::TemplateSet& templates,
                 double temperature, int max_output)
    : backend_(backend), log_(log), templates_(templates), temperature_(temperature), max_output_(max_output) {}

std::string Session::ask(const std::string& purpose, int attempt, const std::string& user_text) {
    llm::ChatExchange ex;
    ex.system_text = templates_.text("system");
    ex.turns.push_back({"user", user_text});
    ex.temperature = temperature_;
    ex.max_output = max_output_;
    ++calls_;
    log_.append({{"type", "llm_request"}, {"attempt", attempt}, {"purpose", purpose}, {"prompt", user_text}});
    try {
        std::string reply = backend_.complete(ex);
        log_.append({{"type", "llm_response"}, {"attempt", attempt}, {"purpose", purpose}, {"text", reply}});
        return reply;
    } catch (const Error& e) {
        log_.append({{"type", "backend_error"}, {"attempt", attempt}, {"purpose", purpose}, {"error", to_string(e.code())}});
        throw;
    }
}

ReasoningResult run_reasoning_phase(const BugReport& report, cpg::ProjectHandle& project, Session& session,
                                    const AgentLimits& limits, int attempt) {
    limits.validate();
    const auto& t = session.templates();
    ReasoningResult result;
    AgentTrace& trace = result.trace;

    auto finish_with = [&](const std::string& cause) {
        trace.root_cause = cause;
        result.root_cause = cause;
        session.log().append({{"type", "root_cause"}, {"attempt", attempt}, {"text", cause}});
        return result;
    };

    // Cause analysis without donor code.
    std::optional<std::string> correction;
    int malformed_streak = 0;
    {
        const std::string reply = session.ask("cause_analysis", attempt, t.render("cause_analysis", report_vars(report)));
        Step step;
        step.reply = reply;
        const auto parsed = llm::parse_agent_output(reply);
        if (!llm::is_none_sentinel(reply)) {
            if (const auto* fa = std::get_if<llm::FinalAnswer>(&parsed)) {
                step.thought = fa->thought;
                trace.steps.push_back(step);
                return finish_with(fa->root_cause);
            }
            if (const auto* bad = std::get_if<llm::Malformed>(&parsed)) {
                correction = bad->reason;
                ++malformed_streak;
            }
        }
        step.thought = std::string(llm::kNoneSentinel);
        trace.steps.push_back(step);
    }

    // Gather loop: one backend call per cycle.
    for (int cycle = 1; cycle <= limits.max_gather_cycles; ++cycle) {
        std::vector<std::string> donor, history;
        for (const auto& r : trace.donor_code) donor.push_back(r.render());
        for (std::size_t i = 1; i < trace.steps.size(); ++i) {
            history.push_back(std::to_string(i) + ". " + describe_step(trace.steps[i]));
        }
        auto vars = report_vars(report);
        vars["tools"] = tool_list();
        vars["donor_code"] = join_lines(donor, "(none yet)");
        vars["history"] = join_lines(history, "(none yet)");
        vars["correction"] = correction_text(t, correction);
        correction.reset();

        const std::string reply = session.ask("gather", attempt, t.render("gather", vars));
        Step step;
        step.reply = reply;
        const auto parsed = llm::parse_agent_output(reply);

        if (const auto* call = std::get_if<llm::ToolCallRequest>(&parsed)) {
            malformed_streak = 0;
            step.thought = call->thought;
            step.action = *call;
            std::map<std::string, std::string> args(call->args.begin(), call->args.end());
            tools::IngredientResult obs;
            if (trace.tool_calls >= limits.max_react_steps) {
                step.observation = "(step limit reached; no tool was run)";
            } else {
                ++trace.tool_calls;
                session.log().append({{"type", "tool_call"},
                                      {"attempt", attempt},
                                      {"tool", call->tool},
                                      {"args", args_json(call->args)}});
                try {
                    obs = tools::invoke(call->tool, args, project.graph());
                } catch (const std::exception& e) {
                    obs = tools::IngredientResult{call->tool, call->args, {}, std::string("tool failure: ") + e.what()};
                }
                step.observation = obs.render();
                if (std::find(trace.donor_code.begin(), trace.donor_code.end(), obs) == trace.donor_code.end()) {
                    trace.donor_code.push_back(obs);
                }
                session.log().append({{"type", "observation"},
                                      {"attempt", attempt},
                                      {"tool", call->tool},
                                      {"hits", obs.hits.size()},
                                      {"text", *step.observation}});
            }
            trace.steps.push_back(std::move(step));
            continue;
        }
        if (llm::is_none_sentinel(reply)) {
            malformed_streak = 0;
            step.thought = std::string(llm::kNoneSentinel);
            trace.steps.push_back(std::move(step));
            continue;
        }
        if (const auto* fa = std::get_if<llm::FinalAnswer>(&parsed)) {
            step.thought = fa->thought;
            trace.steps.push_back(std::move(step));
            return finish_with(fa->root_cause);
        }
        if (const auto* th = std::get_if<llm::Thought>(&parsed)) {
            malformed_streak = 0;
            step.thought = th->text;
            trace.steps.push_back(std::move(step));
            continue;
        }
        const auto& bad = std::get<llm::Malformed>(parsed);
        step.thought = "(unparseable reply: " + bad.reason + ")";
        trace.steps.push_back(std::move(step));
        correction = bad.reason;
        if (++malformed_streak >= limits.max_malformed_streak) {
            break;
        }
    }

    session.log().append({{"type", "cause_not_found"}, {"attempt", attempt}, {"steps", trace.steps.size()}});
    cpg::close_project(project);
    return result;
}

SolutionResult run_solution_phase(const BugReport& report, const std::string& root_cause,
                                  const corpus::TriadStore* store, const retrieval::RetrievalConfig& retrieval_cfg,
                                  const retrieval::Embedder& embedder, Session& session, const RepairBudget& budget,
                                  int attempt, const CandidateSink& sink, std::size_t batch) {
    budget.validate();
    const auto& t = session.templates();
    SolutionResult out;

    // External ingredients.
    nlohmann::json retrieval_event = {{"type", "retrieval"}, {"attempt", attempt}};
    if (!store || store->empty()) {
        retrieval_event["warning"] = "EMPTY_STORE";
    } else {
        const auto q = retrieval::embed_query(report.buggy_code, root_cause, retrieval_cfg, embedder);
        out.patterns = retrieval::retrieve(q, *store, retrieval_cfg);
    }
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : out.patterns) hits.push_back({{"id", h.triad.id}, {"score", h.score}});
    retrieval_event["hits"] = hits;
    session.log().append(retrieval_event);

    std::string patterns;
    for (std::size_t i = 0; i < out.patterns.size(); ++i) {
        const auto& h = out.patterns[i];
        std::ostringstream s;
        s.precision(4);
        s << std::fixed << h.score;
        patterns += "Pattern " + std::to_string(i + 1) + " (similarity " + s.str() + ")\nRoot cause: " +
                    h.triad.root_cause + "\nBuggy:\n" + h.triad.buggy_code + "\nFixed:\n" + h.triad.fix_code + "\n\n";
    }
    if (patterns.empty()) patterns = "(no similar past fixes retrieved)\n";

    // Suggestions, with at most min(2, S - 1) corrective re-prompts.
    const int reprompts = std::min(2, budget.suggestions_per_attempt - 1);
    std::optional<std::string> correction;
    for (int k = 0; k <= reprompts && out.suggestions.empty(); ++k) {
        auto vars = report_vars(report);
        vars["root_cause"] = root_cause;
        vars["patterns"] = patterns;
        vars["count"] = std::to_string(budget.suggestions_per_attempt);
        vars["correction"] = correction_text(t, correction);
        const std::string reply = session.ask("suggestions", attempt, t.render("suggestions", vars));
        const auto parsed = llm::parse_agent_output(reply);
        if (const auto* fa = std::get_if<llm::FinalAnswer>(&parsed); fa && !fa->suggestions.empty()) {
            for (const auto& s : fa->suggestions) {
                if (static_cast<int>(out.suggestions.size()) < budget.suggestions_per_attempt) out.suggestions.push_back(s);
            }
        } else if (const auto* bad = std::get_if<llm::Malformed>(&parsed)) {
            correction = bad->reason;
        } else {
            correction = "no numbered suggestions";
        }
    }
    session.log().append({{"type", "suggestions"}, {"attempt", attempt}, {"items", out.suggestions}});

    // Candidate functions.
    std::vector<CandidatePatch> pending;
    auto flush = [&] {
        if (pending.empty()) return false;
        const bool stop = sink && sink(pending);
        pending.clear();
        return stop;
    };
    for (std::size_t si = 0; si < out.suggestions.size(); ++si) {
        int malformed_streak = 0;
        std::optional<std::string> patch_correction;
        for (int pi = 0; pi < budget.patches_per_suggestion; ++pi) {
            const std::string reply =
                session.ask("patch", attempt,
                            t.render("patch", {{"buggy_code", report.buggy_code},
                                               {"root_cause", root_cause},
                                               {"suggestion_index", std::to_string(si + 1)},
                                               {"suggestion", out.suggestions[si]},
                                               {"patch_index", std::to_string(pi + 1)},
                                               {"patch_count", std::to_string(budget.patches_per_suggestion)},
                                               {"correction", correction_text(t, patch_correction)}}));
            patch_correction.reset();
            const auto body = llm::extract_code_block(reply);
            if (!body) {
                patch_correction = "no fenced code block";
                if (++malformed_streak >= 3) break;
                continue;
            }
            malformed_streak = 0;
            CandidatePatch c{report.id, attempt, static_cast<int>(si) + 1, pi + 1, *body};
            session.log().append({{"type", "candidate"},
                                  {"attempt", attempt},
                                  {"suggestion_index", c.suggestion_index},
                                  {"patch_index", c.patch_index},
                                  {"new_body", c.new_body}});
            out.candidates.push_back(c);
            pending.push_back(std::move(c));
            if (pending.size() >= std::max<std::size_t>(1, batch) && flush()) {
                out.stopped = true;
                return out;
            }
        }
        if (flush()) {
            out.stopped = true;
            return out;
        }
    }
    return out;
}

RepairResult repair(const BugReport& report, const std::filesystem::path& project_root,
                    const corpus::TriadStore* store, const retrieval::Embedder& embedder, llm::LlmBackend& backend,
                    const RepairConfig& cfg, SessionLog& log, const templates::TemplateSet& templates) {
    cfg.budget.validate();
    cfg.limits.validate();
    cfg.retrieval.validate();
    Session session(backend, log, templates, cfg.temperature, cfg.max_output);
    RepairResult result;
    log.append({{"type", "repair_start"},
                {"report", report.to_json()},
                {"templates", templates.version()},
                {"budget", {cfg.budget.attempts, cfg.budget.suggestions_per_attempt, cfg.budget.patches_per_suggestion}},
                {"max_gather_cycles", cfg.limits.max_gather_cycles},
                {"embedder", embedder.name()}});

    for (int attempt = 1; attempt <= cfg.budget.attempts && !result.plausible; ++attempt) {
        AttemptRecord rec;
        rec.attempt = attempt;
        log.append({{"type", "attempt_start"}, {"attempt", attempt}});
        auto project = cpg::open_project(project_root);
        auto reasoning = run_reasoning_phase(report, project, session, cfg.limits, attempt);
        rec.trace = std::move(reasoning.trace);
        if (!reasoning.root_cause) {
            rec.failure = ErrorCode::cause_not_found;
            result.attempts.push_back(std::move(rec));
            continue;
        }

        auto sink = [&](const std::vector<CandidatePatch>& batch) {
            const auto results = validation::validate_all(project_root, report, batch, cfg.validation);
            for (const auto& r : results) {
                std::string reason;
                if (r.verdict == validation::Verdict::broken) {
                    reason = r.detail.rfind("PARSE_FAIL", 0) == 0 ? "PARSE_FAIL" : "SUITE_LAUNCH_FAIL";
                }
                auto event = r.to_json();
                event.erase("detail");
                event["type"] = "validation";
                if (!reason.empty()) event["reason"] = reason;
                log.append(event);
                ++result.validations;
                rec.results.push_back(r);
                if (r.verdict == validation::Verdict::plausible) {
                    result.plausible = r.patch;
                    return true;
                }
            }
            return false;
        };
        auto solution = run_solution_phase(report, *reasoning.root_cause, store, cfg.retrieval, embedder, session,
                                           cfg.budget, attempt, sink, cfg.validation.width);
        rec.trace.suggestions = solution.suggestions;
        rec.trace.patches_generated = static_cast<int>(solution.candidates.size());
        result.candidates += solution.candidates.size();
        rec.candidates = std::move(solution.candidates);
        cpg::close_project(project);
        result.attempts.push_back(std::move(rec));
    }
    result.backend_calls = session.backend_calls();
    nlohmann::json outcome = {{"type", "outcome"},
                              {"verdict", result.plausible ? "PLAUSIBLE" : "NO_PLAUSIBLE_PATCH"},
                              {"candidates", result.candidates},
                              {"validations", result.validations},
                              {"backend_calls", result.backend_calls}};
    if (result.plausible) outcome["patch"] = result.plausible->to_json();
    log.append(outcome);
    return result;
}

}  // namespace reinfix::agent
