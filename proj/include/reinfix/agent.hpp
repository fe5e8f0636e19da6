#pragma once

// The repair loop: a reasoning phase that gathers project context until a
// root cause is stated, then a solution phase that retrieves past fixes,
// asks for suggestions and candidate functions, and validates them.

#include "reinfix/corpus.hpp"
#include "reinfix/cpg.hpp"
#include "reinfix/error.hpp"
#include "reinfix/ingredient_tools.hpp"
#include "reinfix/llm.hpp"
#include "reinfix/retrieval.hpp"
#include "reinfix/session_log.hpp"
#include "reinfix/templates.hpp"
#include "reinfix/validation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace reinfix::agent {

using validation::BugReport;
using validation::CandidatePatch;
using validation::ValidationResult;

struct RepairBudget {
    int attempts = 3;
    int suggestions_per_attempt = 3;
    int patches_per_suggestion = 5;

    int max_candidates() const { return attempts * suggestions_per_attempt * patches_per_suggestion; }
    void validate() const;
    bool operator==(const RepairBudget&) const = default;
};

struct AgentLimits {
    int max_gather_cycles = 5;
    int max_react_steps = 20;  // tool calls per attempt
    int max_malformed_streak = 3;

    void validate() const;
    bool operator==(const AgentLimits&) const = default;
};

struct Step {
    std::string thought;
    std::optional<llm::ToolCallRequest> action;
    std::optional<std::string> observation;
    std::string reply;  // raw backend text
};

struct AgentTrace {
    std::vector<Step> steps;
    std::vector<tools::IngredientResult> donor_code;
    std::optional<std::string> root_cause;
    std::vector<std::string> suggestions;
    int patches_generated = 0;
    int tool_calls = 0;
};

/// Backend access for one session: renders templates, logs every request and
/// response, counts calls.
class Session {
  public:
    Session(llm::LlmBackend& backend, SessionLog& log, const templates::TemplateSet& templates,
            double temperature = 1.0, int max_output = 2048);

    std::string ask(const std::string& purpose, int attempt, const std::string& user_text);
    const templates::TemplateSet& templates() const noexcept { return templates_; }
    SessionLog& log() noexcept { return log_; }
    std::size_t backend_calls() const noexcept { return calls_; }

  private:
    llm::LlmBackend& backend_;
    SessionLog& log_;
    const templates::TemplateSet& templates_;
    double temperature_;
    int max_output_;
    std::size_t calls_ = 0;
};

struct ReasoningResult {
    AgentTrace trace;
    std::optional<std::string> root_cause;  // nullopt: CAUSE_NOT_FOUND, and the project is closed
};

ReasoningResult run_reasoning_phase(const BugReport& report, cpg::ProjectHandle& project, Session& session,
                                    const AgentLimits& limits, int attempt = 1);

/// Receives each batch of fresh candidates; returns true to stop generating.
using CandidateSink = std::function<bool(const std::vector<CandidatePatch>&)>;

struct SolutionResult {
    std::vector<retrieval::RetrievalHit> patterns;
    std::vector<std::string> suggestions;
    std::vector<CandidatePatch> candidates;
    bool stopped = false;
};

/// `store` may be null, which behaves like an empty store.
SolutionResult run_solution_phase(const BugReport& report, const std::string& root_cause,
                                  const corpus::TriadStore* store, const retrieval::RetrievalConfig& retrieval_cfg,
                                  const retrieval::Embedder& embedder, Session& session, const RepairBudget& budget,
                                  int attempt = 1, const CandidateSink& sink = {}, std::size_t batch = 1);

struct RepairConfig {
    retrieval::RetrievalConfig retrieval;
    RepairBudget budget;
    AgentLimits limits;
    validation::ValidationOptions validation;
    double temperature = 1.0;
    int max_output = 2048;
};

struct AttemptRecord {
    int attempt = 0;
    AgentTrace trace;
    std::optional<ErrorCode> failure;
    std::vector<CandidatePatch> candidates;
    std::vector<ValidationResult> results;
};

struct RepairResult {
    std::optional<CandidatePatch> plausible;
    std::vector<AttemptRecord> attempts;
    std::size_t backend_calls = 0;
    std::size_t candidates = 0;
    std::size_t validations = 0;
};

/// Attempts until the first plausible candidate or until the budget is spent.
/// The absence of a plausible patch is a normal outcome, not an error.
RepairResult repair(const BugReport& report, const std::filesystem::path& project_root,
                    const corpus::TriadStore* store, const retrieval::Embedder& embedder, llm::LlmBackend& backend,
                    const RepairConfig& cfg, SessionLog& log,
                    const templates::TemplateSet& templates = templates::TemplateSet::builtin());

/// attempts * (1 + gather cycles + 1 + suggestions * (1 + patches)).
std::size_t backend_call_bound(const RepairBudget& budget, const AgentLimits& limits);

}  // namespace reinfix::agent
