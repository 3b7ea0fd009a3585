#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/prompts.hpp"
#include "spage/sql_emit.hpp"
#include "spage/table.hpp"

namespace spage {

// Decoding parameters and prompt-shaping knobs for all three model roles
// (planner, SQL translator, summary generator).
struct LlmConfig {
    std::string model_name;
    double temperature = 0.1;
    double top_p = 0.95;
    int max_output_tokens = 400;
    int demo_count = 3;      // in-context demonstrations per prompt
    int k_rows = 3;          // table rows included in planner prompts
    int max_prompt_tokens = 0;  // 0 = unlimited; estimated at 4 chars/token
    int max_concurrent_requests = 4;

    static LlmConfig from_env() {
        LlmConfig cfg;
        if (const char* m = std::getenv("SPAGE_LLM_MODEL")) cfg.model_name = m;
        return cfg;
    }
};

// A query over a table catalog, optionally with a reference summary for
// evaluation.
struct SummarizationTask {
    std::string query;
    Catalog catalog;
    std::optional<std::string> reference_summary;
};

struct CompletionRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.1;
    double top_p = 0.95;
    int max_tokens = 400;
    std::optional<std::string> schema_hint;  // JSON schema the reply should satisfy
};

// Single text-in/text-out completion contract. Implementations must tolerate
// concurrent in-flight requests.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

namespace detail {

inline int approx_tokens(const std::string& text) { return int((text.size() + 3) / 4); }

inline void check_budget(const LlmConfig& config, const std::string& prompt) {
    if (config.max_prompt_tokens > 0 && approx_tokens(prompt) > config.max_prompt_tokens)
        throw BudgetExceeded("prompt of ~" + std::to_string(approx_tokens(prompt)) +
                             " tokens exceeds the cap of " +
                             std::to_string(config.max_prompt_tokens));
}

inline CompletionRequest make_request(const LlmConfig& config, std::string prompt,
                                      std::optional<std::string> schema_hint = std::nullopt) {
    check_budget(config, prompt);
    CompletionRequest req;
    req.prompt = std::move(prompt);
    req.model = config.model_name;
    req.temperature = config.temperature;
    req.top_p = config.top_p;
    req.max_tokens = config.max_output_tokens;
    req.schema_hint = std::move(schema_hint);
    return req;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

struct PlannerDemo {
    SummarizationTask task;
    Plan plan;
};

inline std::string build_planner_prompt(const SummarizationTask& task, const LlmConfig& config,
                                        const std::vector<PlannerDemo>& demos) {
    std::string prompt = PLANNER_INSTRUCTIONS;
    size_t n = std::min(size_t(std::max(0, config.demo_count)), demos.size());
    for (size_t i = 0; i < n; ++i) {
        prompt += "\n### Example\n";
        for (const auto& table : demos[i].task.catalog.tables())
            prompt += linearize(*table, size_t(config.k_rows));
        prompt += "Query: " + demos[i].task.query + "\n";
        prompt += "Plan:\n" + serialize_plan(demos[i].plan);
    }
    prompt += "\n### Task\n";
    for (const auto& table : task.catalog.tables())
        prompt += linearize(*table, size_t(config.k_rows));
    prompt += "Query: " + task.query + "\n";
    prompt += "Plan:\n";
    return prompt;
}

struct SqlDemo {
    Step step;
    std::vector<Schema> source_schemas;
    std::string sql;
};

inline std::string build_step_sql_prompt(const Step& step,
                                         const std::vector<Schema>& source_schemas,
                                         const LlmConfig& config,
                                         const std::vector<SqlDemo>& demos) {
    std::string prompt = SQL_INSTRUCTIONS;
    size_t n = std::min(size_t(std::max(0, config.demo_count)), demos.size());
    for (size_t i = 0; i < n; ++i) {
        prompt += "\n### Example\n";
        prompt += sql_request_document(demos[i].step, demos[i].source_schemas) + "\n";
        prompt += "SQL: " + demos[i].sql + "\n";
    }
    prompt += "\n### Task\n";
    prompt += sql_request_document(step, source_schemas) + "\n";
    prompt += "SQL:";
    return prompt;
}

inline std::string build_summary_prompt(const SummarizationTask& task,
                                        const Table& terminal_table) {
    std::string prompt = SUMMARY_INSTRUCTIONS;
    prompt += "\nQuery: " + task.query + "\n";
    prompt += "Result:\n";
    // terminal tables are small; include every row
    prompt += linearize(terminal_table, std::max<size_t>(1, terminal_table.row_count()));
    prompt += "Summary:";
    return prompt;
}

// ---------------------------------------------------------------------------
// Planner output parsing
// ---------------------------------------------------------------------------

// First balanced JSON object in the response (code fences and prose are
// skipped naturally), handed to the plan parser.
inline Plan parse_planner_output(const std::string& text) {
    size_t start = std::string::npos;
    int depth = 0;
    bool in_string = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            if (start != std::string::npos) in_string = true;
            continue;
        }
        if (c == '{') {
            if (start == std::string::npos) start = i;
            ++depth;
        } else if (c == '}' && start != std::string::npos) {
            if (--depth == 0) return parse_plan(text.substr(start, i - start + 1));
        }
    }
    throw NoJsonFound("no JSON document in planner response");
}

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

inline std::string request_plan(const SummarizationTask& task, const LlmConfig& config,
                                const std::vector<PlannerDemo>& demos,
                                CompletionBackend& backend) {
    auto req = detail::make_request(config, build_planner_prompt(task, config, demos),
                                    "{\"steps\": [...]}");
    return backend.complete(req);
}

inline std::string request_summary(const SummarizationTask& task, const Table& terminal_table,
                                   const LlmConfig& config, CompletionBackend& backend) {
    auto req = detail::make_request(config, build_summary_prompt(task, terminal_table));
    return backend.complete(req);
}

inline std::string request_step_sql(const Step& step, const std::vector<Schema>& source_schemas,
                                    const LlmConfig& config, const std::vector<SqlDemo>& demos,
                                    CompletionBackend& backend) {
    auto req = detail::make_request(config, build_step_sql_prompt(step, source_schemas, config,
                                                                  demos));
    return backend.complete(req);
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

struct HttpBackendConfig {
    std::string base_url;  // e.g. http://localhost:8080
    std::string api_key;
    std::string path = "/v1/complete";
    int retries = 2;  // transport errors only, exponential backoff
    std::chrono::milliseconds initial_backoff{250};
    int max_concurrent_requests = 4;

    static HttpBackendConfig from_env() {
        HttpBackendConfig cfg;
        if (const char* v = std::getenv("SPAGE_LLM_BASE_URL")) cfg.base_url = v;
        if (const char* v = std::getenv("SPAGE_LLM_API_KEY")) cfg.api_key = v;
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// Deterministic offline backends
// ---------------------------------------------------------------------------

// Wraps a plain function; the building block for bespoke test doubles.
class FunctionBackend : public CompletionBackend {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const CompletionRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

// Scan-the-first-table policy: a planner stand-in that always produces a
// valid single-step plan from the prompt's first linearized table.
class MockPlannerBackend : public CompletionBackend {
public:
    std::string complete(const CompletionRequest& request) override {
        size_t task_pos = request.prompt.rfind("### Task");
        if (task_pos == std::string::npos) task_pos = 0;
        size_t name_pos = request.prompt.find("table name: ", task_pos);
        if (name_pos == std::string::npos)
            throw BackendError("mock planner: no linearized table in prompt");
        size_t name_end = request.prompt.find('\n', name_pos);
        std::string name = request.prompt.substr(name_pos + 12, name_end - name_pos - 12);
        size_t col_pos = request.prompt.find("col: ", name_end);
        size_t col_end = request.prompt.find('\n', col_pos);
        std::string cols = request.prompt.substr(col_pos + 5, col_end - col_pos - 5);
        nlohmann::ordered_json step;
        step["id"] = 1;
        step["operation"] = "Scan";
        step["source"] = {name};
        step["condition"] = nullptr;
        step["output"] = nlohmann::ordered_json::array();
        size_t start = 0;
        while (start <= cols.size()) {
            size_t sep = cols.find(" | ", start);
            std::string col =
                sep == std::string::npos ? cols.substr(start) : cols.substr(start, sep - start);
            if (!col.empty()) step["output"].push_back(col);
            if (sep == std::string::npos) break;
            start = sep + 3;
        }
        nlohmann::ordered_json doc;
        doc["steps"] = {step};
        return doc.dump();
    }
};

// Echo-policy summary generator: deterministic template naming the query and
// the result row count.
class MockSummaryBackend : public CompletionBackend {
public:
    std::string complete(const CompletionRequest& request) override {
        std::string query = extract_line(request.prompt, "Query: ");
        size_t rows = 0;
        size_t pos = 0;
        while ((pos = request.prompt.find("\nrow ", pos)) != std::string::npos) {
            ++rows;
            pos += 5;
        }
        if (rows == 0)
            return "No matching records were found for the query \"" + query + "\".";
        return "For the query \"" + query + "\", the plan produced " + std::to_string(rows) +
               " matching row" + (rows == 1 ? "" : "s") + ".";
    }

private:
    static std::string extract_line(const std::string& text, const std::string& prefix) {
        size_t pos = text.find(prefix);
        if (pos == std::string::npos) return "";
        size_t end = text.find('\n', pos);
        return text.substr(pos + prefix.size(), end - pos - prefix.size());
    }
};

// SQL-translator stand-in: reads the request document off the end of the
// prompt and runs the deterministic emitter, optionally corrupting a seeded
// fraction of queries to exercise failure accounting.
class MockSqlBackend : public CompletionBackend {
public:
    explicit MockSqlBackend(double corruption_rate = 0.0, std::uint64_t seed = 0)
        : corruption_rate_(corruption_rate), rng_(seed) {}

    std::string complete(const CompletionRequest& request) override {
        size_t task_pos = request.prompt.rfind("### Task");
        if (task_pos == std::string::npos)
            throw BackendError("mock sql backend: malformed prompt");
        size_t doc_pos = request.prompt.find('{', task_pos);
        size_t doc_end = request.prompt.rfind('}');
        if (doc_pos == std::string::npos || doc_end == std::string::npos || doc_end < doc_pos)
            throw BackendError("mock sql backend: no request document in prompt");
        auto doc = nlohmann::ordered_json::parse(request.prompt.substr(doc_pos,
                                                                       doc_end - doc_pos + 1));
        Step step = parse_request_step(doc);
        std::vector<Schema> schemas = parse_request_schemas(doc);
        EmitOptions options;
        options.dialect = SqlDialect::SqliteCompat;
        options.topsort_rowid_tiebreak = true;
        std::string sql = emit_step_sql(step, schemas, options).sql;
        bool corrupt;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            corrupt = std::bernoulli_distribution(corruption_rate_)(rng_);
        }
        if (corrupt) sql = "SELEC " + sql.substr(7) + " FROM FROM";
        return sql;
    }

private:
    // one lone step: parse the fields directly, skipping plan-level checks
    static Step parse_request_step(const nlohmann::ordered_json& doc) {
        const auto& sj = doc.at("step");
        Step step;
        step.id = sj.at("id").get<int>();
        auto op = operation_from_name(sj.at("operation").get<std::string>());
        if (!op) throw BackendError("mock sql backend: unknown operation");
        step.operation = *op;
        for (const auto& src : sj.at("source"))
            step.source.push_back(SourceRef::parse(src.get<std::string>()));
        if (sj.contains("condition") && !sj.at("condition").is_null()) {
            std::string cond = sj.at("condition").get<std::string>();
            if (is_sort_operation(step.operation)) step.sort = parse_sort_spec(cond);
            else step.predicate = parse_predicate(cond);
        }
        for (const auto& out : sj.at("output"))
            step.output.push_back(parse_output_expr(out.get<std::string>()));
        return step;
    }

    static std::vector<Schema> parse_request_schemas(const nlohmann::ordered_json& doc) {
        std::vector<Schema> out;
        for (const auto& entry : doc.at("schemas")) {
            std::vector<Column> cols;
            for (const auto& col : entry.at("columns")) {
                auto type = column_type_from_name(col.at(1).get<std::string>());
                if (!type) throw BackendError("mock sql backend: bad column type");
                cols.push_back({col.at(0).get<std::string>(), *type});
            }
            out.push_back(Schema(std::move(cols)));
        }
        return out;
    }

    double corruption_rate_;
    std::mt19937_64 rng_;
    std::mutex mutex_;
};

}  // namespace spage
