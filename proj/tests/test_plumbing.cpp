#include <doctest.h>

#include "reinfix/config.hpp"
#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/session_log.hpp"
#include "reinfix/templates.hpp"
#include "test_util.hpp"

#include <random>

using namespace reinfix;

namespace {

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("builtin templates") {
    const auto& t = templates::TemplateSet::builtin();
    CHECK(t.version() == "reinfix-prompts/1");
    for (const char* name : {"system", "label_root_cause", "cause_analysis", "gather", "suggestions", "patch", "correction"}) {
        CHECK(t.has(name));
    }
    const auto text = t.render("label_root_cause", {{"buggy_code", "int {{x}}() {}"}, {"fix_code", "int y() {}"}});
    CHECK(text.find("int {{x}}() {}") != std::string::npos);
    CHECK(text.rfind("TASK: label-root-cause", 0) == 0);
    CHECK(error_of([&] { t.render("label_root_cause", {{"buggy_code", "a"}}); }) == ErrorCode::config_error);
    CHECK(error_of([&] { t.render("nope", {}); }) == ErrorCode::config_error);
    CHECK(templates::substitute("{{a}}-{{b}}-{{a}}", {{"a", "1"}, {"b", "{{a}}"}}) == "1-{{a}}-1");
}

TEST_CASE("template directories override builtin text") {
    TempDir dir;
    write_file(dir.path() / "VERSION", "custom/2\n");
    write_file(dir.path() / "correction.txt", "Fix it: {{reason}}");
    const auto t = templates::TemplateSet::load_dir(dir.path());
    CHECK(t.version() == "custom/2");
    CHECK(t.render("correction", {{"reason", "x"}}) == "Fix it: x");
    CHECK(t.text("patch") == templates::TemplateSet::builtin().text("patch"));
    CHECK(error_of([&] { templates::TemplateSet::load_dir(dir.path() / "missing"); }) == ErrorCode::config_error);
}

TEST_CASE("session log") {
    SessionLog log;
    std::vector<std::string> streamed;
    log.set_sink([&](const std::string& line) { streamed.push_back(line); });
    CHECK(log.append({{"type", "a"}, {"v", 1}}) == 0);
    CHECK(log.append({{"type", "b"}, {"text", "line\nbreak \"quoted\""}}) == 1);
    CHECK(log.append({{"type", "a"}, {"v", 2}}) == 2);
    CHECK(log.count("a") == 2);
    CHECK(log.of_type("b")[0]["seq"] == 1);
    CHECK(streamed.size() == 3);

    TempDir dir;
    log.save(dir.path() / "log.jsonl");
    const auto back = SessionLog::load(dir.path() / "log.jsonl");
    CHECK(back.to_jsonl() == log.to_jsonl());
    CHECK(back.hash() == log.hash());
    CHECK(log.hash() == sha256_hex(log.to_jsonl()));

    SessionLog other;
    other.append({{"type", "a"}, {"v", 1}});
    CHECK(other.hash() != log.hash());
    CHECK(error_of([] { SessionLog::parse("{\"no_type\": 1}\n"); }) == ErrorCode::malformed_record);
    CHECK(error_of([] { SessionLog::parse("{bad\n"); }) == ErrorCode::malformed_record);
}

TEST_CASE("config defaults and validation") {
    config::Config c;
    CHECK(c.budget.max_candidates() == 45);
    CHECK(c.backend.temperature == 1.0);
    CHECK(c.retrieval.top_n == 3);
    CHECK(c.limits.agent.max_gather_cycles == 5);
    CHECK(c.limits.agent.max_react_steps == 20);
    CHECK(error_of([&] { c.validate(); }) == ErrorCode::config_error);  // mock needs a script
    c.backend.script = "s.json";
    CHECK_NOTHROW(c.validate());
    for (auto mutate : std::vector<std::function<void(config::Config&)>>{
             [](auto& x) { x.budget.attempts = 0; },
             [](auto& x) { x.budget.patches_per_suggestion = -1; },
             [](auto& x) { x.limits.agent.max_gather_cycles = 0; },
             [](auto& x) { x.limits.test_timeout_s = 0; },
             [](auto& x) { x.embedder.dimension = 0; },
             [](auto& x) { x.retrieval.top_n = 0; },
             [](auto& x) { x.retrieval.threshold = 2; },
             [](auto& x) { x.backend.kind = "other"; },
             [](auto& x) { x.backend.kind = "remote"; },
         }) {
        auto bad = c;
        mutate(bad);
        CHECK(error_of([&] { bad.validate(); }) == ErrorCode::config_error);
    }
}

TEST_CASE("config parse and render") {
    const auto c = config::parse(R"(# comment
[backend]
kind = "remote"   # trailing comment
base_url = "https://api.example.com/v1"
model = "m-1"
key_env = "API_KEY"
temperature = 0.25

[retrieval]
top_n = 5
threshold = -0.125
separator = "\n--\t\"x\"\\\n"
threshold_after_top_n = true

[budget]
attempts = 2
)");
    CHECK(c.backend.kind == "remote");
    CHECK(c.backend.endpoint.model == "m-1");
    CHECK(c.backend.temperature == 0.25);
    CHECK(c.retrieval.top_n == 5);
    CHECK(c.retrieval.threshold == -0.125);
    CHECK(c.retrieval.separator == "\n--\t\"x\"\\\n");
    CHECK(c.retrieval.threshold_after_top_n);
    CHECK(c.budget.attempts == 2);
    CHECK(c.budget.suggestions_per_attempt == 3);
    CHECK(config::parse(c.render()) == c);

    for (const char* bad : {"[nope]\n", "[budget]\nfoo = 1\n", "[budget]\nattempts = x\n", "[budget]\nattempts\n",
                            "[backend]\nkind = mock\n", "[backend]\nkind = \"mock\n", "[retrieval]\ntop_n = \"3\"\n",
                            "[retrieval]\nthreshold_after_top_n = yes\n", "[backend]\nkind = \"a\" junk\n",
                            "attempts = 3\n", "[backend\n"}) {
        CAPTURE(bad);
        CHECK(error_of([&] { config::parse(bad); }) == ErrorCode::config_error);
    }
}

TEST_CASE("config round trip on random values") {
    std::mt19937_64 rng(8);
    auto text = [&] {
        static const std::string alphabet = "ab \"\\\n\t#=[]{}x1";
        std::string s;
        const auto n = rng() % 12;
        for (std::size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
        return s;
    };
    std::uniform_real_distribution<double> real(-1.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        config::Config c;
        c.backend.kind = rng() % 2 ? "mock" : "remote";
        c.backend.script = text();
        c.backend.endpoint.base_url = text();
        c.backend.endpoint.model = text();
        c.backend.endpoint.timeout_s = 1 + static_cast<int>(rng() % 600);
        c.backend.temperature = real(rng) + 1.0;
        c.embedder.dimension = 1 + static_cast<int>(rng() % 4096);
        c.retrieval.threshold = real(rng);
        c.retrieval.separator = text();
        c.retrieval.threshold_after_top_n = rng() % 2;
        c.budget = {1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 9)};
        c.limits.validation_width = 1 + static_cast<int>(rng() % 8);
        c.paths.store = text();
        c.paths.workdir = text();
        CHECK(config::parse(c.render()) == c);
    }
}

TEST_CASE("config files resolve relative paths") {
    TempDir dir;
    std::filesystem::create_directories(dir.path() / "cfg");
    write_file(dir.path() / "cfg" / "run.toml", "[backend]\nscript = \"script.json\"\n[paths]\nstore = \"../s.jsonl\"\n");
    const auto c = config::load(dir.path() / "cfg" / "run.toml");
    CHECK(c.backend.script == (dir.path() / "cfg" / "script.json").string());
    CHECK(c.paths.store == (dir.path() / "s.jsonl").string());
    CHECK(error_of([&] { config::load(dir.path() / "missing.toml"); }) == ErrorCode::config_error);

    const auto rc = config::repair_config(c);
    CHECK(rc.temperature == 1.0);
    CHECK(rc.budget.max_candidates() == 45);
    CHECK(config::make_embedder(c)->name() == "fallback-256");
}
