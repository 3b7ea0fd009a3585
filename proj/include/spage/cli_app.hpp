#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spage/demos.hpp"
#include "spage/engine.hpp"
#include "spage/evalkit.hpp"
#include "spage/llm.hpp"
#include "spage/llm_http.hpp"
#include "spage/plan_graph.hpp"
#include "spage/plan_json.hpp"
#include "spage/sql_emit.hpp"
#include "spage/table_io.hpp"
#include "spage/taskfile.hpp"
#include "spage/validator.hpp"

namespace spage::cli {

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
}

inline Plan load_plan_file(const std::string& path) { return parse_plan(read_text_file(path)); }

inline nlohmann::ordered_json table_json(const Table& table) {
    nlohmann::ordered_json doc;
    doc["name"] = table.name();
    doc["columns"] = nlohmann::ordered_json::array();
    for (const auto& col : table.schema().columns())
        doc["columns"].push_back({{"name", col.name}, {"type", column_type_name(col.type)}});
    doc["rows"] = nlohmann::ordered_json::array();
    for (const Row& row : table.rows()) {
        nlohmann::ordered_json rj = nlohmann::ordered_json::array();
        for (const Value& v : row) {
            if (v.is_null()) rj.push_back(nullptr);
            else if (v.is_integer()) rj.push_back(v.as_integer());
            else if (v.is_real()) rj.push_back(v.as_real());
            else rj.push_back(v.to_display());
        }
        doc["rows"].push_back(std::move(rj));
    }
    return doc;
}

struct Backends {
    std::unique_ptr<CompletionBackend> planner;
    std::unique_ptr<CompletionBackend> summarizer;
};

inline Backends make_backends(const std::string& kind) {
    Backends b;
    if (kind == "mock") {
        b.planner = std::make_unique<MockPlannerBackend>();
        b.summarizer = std::make_unique<MockSummaryBackend>();
    } else if (kind == "live") {
        auto cfg = HttpBackendConfig::from_env();
        b.planner = std::make_unique<HttpCompletionBackend>(cfg);
        b.summarizer = std::make_unique<HttpCompletionBackend>(cfg);
    } else {
        throw StructureError("unknown backend '" + kind + "' (expected mock or live)");
    }
    return b;
}

inline Plan plan_for_task(const TaskRecord& record, const LlmConfig& config,
                          CompletionBackend& planner) {
    if (record.gold_plan) return *record.gold_plan;
    std::string response = request_plan(record.task, config, default_planner_demos(), planner);
    return parse_planner_output(response);
}

inline std::vector<std::pair<std::string, Plan>> load_plan_corpus(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, Plan>> plans;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) plans.emplace_back(f.filename().string(), load_plan_file(f.string()));
    } else {
        for (const auto& record : load_taskfile(path)) {
            if (record.gold_plan) plans.emplace_back(record.id, *record.gold_plan);
        }
    }
    if (plans.empty()) throw EmptyInput("no plans found under: " + path);
    return plans;
}

}  // namespace detail

// Single entry point behind the `spage` binary; kept header-side so the test
// suite can drive every subcommand in-process.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"structured table-reasoning plans: validate, execute, transpile, evaluate"};
    app.name("spage");
    app.require_subcommand(1);

    // --- validate ---
    std::string validate_plan_path, validate_tables;
    auto* cmd_validate = app.add_subcommand("validate", "check a plan against a table catalog");
    cmd_validate->add_option("plan", validate_plan_path, "plan file")->required();
    cmd_validate->add_option("--tables", validate_tables, "table file or directory")->required();

    // --- graph ---
    std::string graph_plan_path;
    bool graph_dot = false;
    auto* cmd_graph = app.add_subcommand("graph", "dependency DAG, wavefronts and cycle counts");
    cmd_graph->add_option("plan", graph_plan_path, "plan file")->required();
    cmd_graph->add_flag("--dot", graph_dot, "emit DOT instead of JSON");

    // --- compile ---
    std::string compile_plan_path, compile_tables, compile_dialect = "ansi";
    bool compile_per_step = false, compile_cte = false;
    auto* cmd_compile = app.add_subcommand("compile", "emit SQL for a plan");
    cmd_compile->add_option("plan", compile_plan_path, "plan file")->required();
    cmd_compile->add_option("--tables", compile_tables,
                            "table file or directory (enables typed emission)");
    cmd_compile->add_option("--dialect", compile_dialect, "ansi | sqlite-compatible");
    cmd_compile->add_flag("--per-step", compile_per_step, "one SELECT per step");
    cmd_compile->add_flag("--cte", compile_cte, "single WITH-chained query (default)");

    // --- run ---
    std::string run_plan_path, run_tables, run_mode = "graph", run_out = "json";
    int run_jobs = int(std::thread::hardware_concurrency());
    int run_timeout_ms = 10000;
    auto* cmd_run = app.add_subcommand("run", "execute a plan on the native engine");
    cmd_run->add_option("plan", run_plan_path, "plan file")->required();
    cmd_run->add_option("--tables", run_tables, "table file or directory")->required();
    cmd_run->add_option("--mode", run_mode, "seq | graph (default graph)");
    cmd_run->add_option("--out", run_out, "json | csv (terminal table format)");
    cmd_run->add_option("--jobs", run_jobs, "max concurrent steps per wavefront");
    cmd_run->add_option("--timeout-ms", run_timeout_ms, "per-step timeout");

    // --- plan ---
    std::string plan_taskfile, plan_backend = "mock", plan_out_dir = ".";
    auto* cmd_plan = app.add_subcommand("plan", "generate plans for a task file");
    cmd_plan->add_option("taskfile", plan_taskfile, "JSON-lines task file")->required();
    cmd_plan->add_option("--backend", plan_backend, "mock | live");
    cmd_plan->add_option("--out-dir", plan_out_dir, "directory for <id>.plan.json files");

    // --- summarize ---
    std::string summ_taskfile, summ_backend = "mock", summ_out;
    int summ_jobs = int(std::thread::hardware_concurrency());
    auto* cmd_summ = app.add_subcommand("summarize", "full pipeline: plan, execute, summarize");
    cmd_summ->add_option("taskfile", summ_taskfile, "JSON-lines task file")->required();
    cmd_summ->add_option("--backend", summ_backend, "mock | live");
    cmd_summ->add_option("--out", summ_out, "output JSON-lines file (default stdout)");
    cmd_summ->add_option("--jobs", summ_jobs, "max concurrent steps per wavefront");

    // --- eval ---
    std::string eval_taskfile, eval_outputs;
    bool eval_tsv = false;
    auto* cmd_eval = app.add_subcommand("eval", "score summarize outputs against references");
    cmd_eval->add_option("taskfile", eval_taskfile, "JSON-lines task file")->required();
    cmd_eval->add_option("--outputs", eval_outputs, "JSON-lines produced by summarize")
        ->required();
    cmd_eval->add_flag("--tsv", eval_tsv, "tab-separated output instead of JSON");

    // --- bench-cycles ---
    std::string bench_path;
    int bench_jobs = 1;
    auto* cmd_bench =
        app.add_subcommand("bench-cycles", "sequential vs graph cycle statistics for a corpus");
    cmd_bench->add_option("corpus", bench_path, "task file or directory of plan files")
        ->required();
    cmd_bench->add_option("--jobs", bench_jobs, "accepted for symmetry; analysis is pure");

    std::vector<const char*> argv;
    argv.push_back("spage");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << nlohmann::ordered_json({{"error", "UsageError"}, {"message", e.what()}}).dump()
            << "\n";
        return 2;
    }

    try {
        if (*cmd_validate) {
            Plan plan = detail::load_plan_file(validate_plan_path);
            Catalog catalog = load_catalog(validate_tables);
            ValidationReport report = validate_plan(plan, catalog);
            out << report.to_json().dump(2) << "\n";
            return report.ok() ? 0 : 1;
        }

        if (*cmd_graph) {
            Plan plan = detail::load_plan_file(graph_plan_path);
            PlanGraph graph = build_graph(plan);
            if (graph_dot) {
                out << graph_to_dot(graph, plan);
                return 0;
            }
            nlohmann::ordered_json doc;
            doc["nodes"] = graph.nodes;
            doc["edges"] = nlohmann::ordered_json::array();
            for (const auto& [from, to] : graph.edges) doc["edges"].push_back({from, to});
            doc["wavefronts"] = graph.wavefronts;
            doc["depth"] = graph.depth;
            doc["cycles"] = {{"sequential", execution_cycles(graph, CycleMode::Sequential)},
                             {"graph", execution_cycles(graph, CycleMode::Graph)}};
            out << doc.dump(2) << "\n";
            return 0;
        }

        if (*cmd_compile) {
            Plan plan = detail::load_plan_file(compile_plan_path);
            auto dialect = sql_dialect_from_name(compile_dialect);
            if (!dialect) throw StructureError("unknown dialect: " + compile_dialect);
            EmitOptions options;
            options.dialect = *dialect;
            std::optional<Catalog> catalog;
            std::optional<ValidationReport> report;
            if (!compile_tables.empty()) {
                catalog = load_catalog(compile_tables);
                report = validate_plan(plan, *catalog);
                if (!report->ok())
                    throw StructureError("plan does not validate against the catalog: " +
                                         report->errors()[0].message);
            }
            if (compile_per_step) {
                for (const auto& step : plan.steps) {
                    std::optional<std::vector<Schema>> schemas;
                    if (report) {
                        schemas.emplace();
                        for (const auto& src : step.source) {
                            if (src.kind == SourceRef::Kind::InputTable)
                                schemas->push_back(catalog->find(src.table)->schema());
                            else schemas->push_back(report->inferred_schemas.at(src.step_id));
                        }
                    }
                    out << "-- step " << step.id << "\n"
                        << emit_step_sql(step, schemas, options).sql << ";\n";
                }
            } else {
                if (!catalog)
                    throw StructureError(
                        "--cte emission needs --tables for schema-aware step chaining");
                out << emit_plan_sql(plan, *catalog, options) << "\n";
            }
            return 0;
        }

        if (*cmd_run) {
            Plan plan = detail::load_plan_file(run_plan_path);
            Catalog catalog = load_catalog(run_tables);
            ExecOptions options;
            if (run_mode == "seq") options.mode = ExecMode::Sequential;
            else if (run_mode == "graph") options.mode = ExecMode::Wavefront;
            else throw StructureError("unknown mode: " + run_mode);
            options.jobs = run_jobs;
            options.step_timeout = std::chrono::milliseconds(run_timeout_ms);
            ExecutionReport report = execute_plan(plan, catalog, options);
            if (run_out == "csv") {
                if (!report.terminal_table)
                    throw EvalError("terminal step failed; no table to print");
                out << table_to_csv(*report.terminal_table);
            } else if (run_out == "json") {
                nlohmann::ordered_json doc;
                doc["report"] = report.to_json();
                doc["terminal_table"] = report.terminal_table
                                            ? detail::table_json(*report.terminal_table)
                                            : nlohmann::ordered_json(nullptr);
                out << doc.dump(2) << "\n";
            } else {
                throw StructureError("unknown output format: " + run_out);
            }
            return report.terminal_table ? 0 : 1;
        }

        if (*cmd_plan) {
            auto records = load_taskfile(plan_taskfile);
            auto backends = detail::make_backends(plan_backend);
            LlmConfig config = LlmConfig::from_env();
            std::filesystem::create_directories(plan_out_dir);
            bool all_ok = true;
            for (const auto& record : records) {
                try {
                    std::string response = request_plan(record.task, config,
                                                        default_planner_demos(), *backends.planner);
                    Plan plan = parse_planner_output(response);
                    ValidationReport report = validate_plan(plan, record.task.catalog);
                    std::string path =
                        (std::filesystem::path(plan_out_dir) / (record.id + ".plan.json")).string();
                    detail::write_text_file(path, serialize_plan(plan));
                    out << nlohmann::ordered_json({{"id", record.id},
                                                   {"plan", path},
                                                   {"valid", report.ok()}})
                               .dump()
                        << "\n";
                    if (!report.ok()) all_ok = false;
                } catch (const Error& e) {
                    all_ok = false;
                    err << nlohmann::ordered_json(
                               {{"id", record.id}, {"error", e.kind()}, {"message", e.what()}})
                               .dump()
                        << "\n";
                }
            }
            return all_ok ? 0 : 1;
        }

        if (*cmd_summ) {
            auto records = load_taskfile(summ_taskfile);
            auto backends = detail::make_backends(summ_backend);
            LlmConfig config = LlmConfig::from_env();
            std::ostringstream lines;
            bool all_ok = true;
            for (const auto& record : records) {
                nlohmann::ordered_json rec;
                rec["id"] = record.id;
                try {
                    Plan plan = detail::plan_for_task(record, config, *backends.planner);
                    ValidationReport vreport = validate_plan(plan, record.task.catalog);
                    if (!vreport.ok())
                        throw StructureError("plan does not validate: " +
                                             vreport.errors()[0].message);
                    ExecOptions options;
                    options.jobs = summ_jobs;
                    ExecutionReport report = execute_plan(plan, record.task.catalog, options);
                    if (!report.terminal_table) throw EvalError("terminal step failed");
                    std::string summary = request_summary(record.task, *report.terminal_table,
                                                          config, *backends.summarizer);
                    rec["summary"] = summary;
                    rec["report"] = report.to_json();
                } catch (const Error& e) {
                    all_ok = false;
                    rec["summary"] = "";
                    rec["error"] = {{"kind", e.kind()}, {"message", e.what()}};
                }
                lines << rec.dump() << "\n";
            }
            if (summ_out.empty()) out << lines.str();
            else detail::write_text_file(summ_out, lines.str());
            return all_ok ? 0 : 1;
        }

        if (*cmd_eval) {
            auto records = load_taskfile(eval_taskfile);
            std::ifstream in(eval_outputs);
            if (!in) throw IoError("cannot read outputs file: " + eval_outputs);
            std::map<std::string, TaskOutput> outputs;
            std::string line;
            while (std::getline(in, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                auto doc = nlohmann::ordered_json::parse(line);
                TaskOutput output;
                output.summary = doc.value("summary", "");
                if (doc.contains("report"))
                    output.report = execution_report_from_json(doc["report"]);
                outputs.emplace(doc.at("id").get<std::string>(), std::move(output));
            }
            std::vector<SummarizationTask> tasks;
            std::vector<TaskOutput> aligned;
            for (const auto& record : records) {
                auto it = outputs.find(record.id);
                if (it == outputs.end())
                    throw LengthMismatch("no output for task id '" + record.id + "'");
                tasks.push_back(record.task);
                aligned.push_back(it->second);
            }
            EvalResult result = evaluate_batch(tasks, aligned);
            if (eval_tsv) out << result.to_tsv();
            else out << result.to_json().dump(2) << "\n";
            return 0;
        }

        if (*cmd_bench) {
            auto plans = detail::load_plan_corpus(bench_path);
            std::vector<PlanGraph> graphs;
            nlohmann::ordered_json per_plan = nlohmann::ordered_json::array();
            for (const auto& [name, plan] : plans) {
                PlanGraph g = build_graph(plan);
                per_plan.push_back({{"plan", name},
                                    {"steps", g.nodes.size()},
                                    {"depth", g.depth}});
                graphs.push_back(std::move(g));
            }
            CycleStats stats = cycle_stats(graphs);
            nlohmann::ordered_json doc;
            doc["plans"] = graphs.size();
            doc["avg_sequential"] = stats.avg_sequential;
            doc["avg_graph"] = stats.avg_graph;
            doc["reduction"] = stats.reduction;
            doc["per_plan"] = std::move(per_plan);
            out << doc.dump(2) << "\n";
            return 0;
        }
    } catch (const Error& e) {
        err << nlohmann::ordered_json({{"error", e.kind()}, {"message", e.what()}}).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << nlohmann::ordered_json({{"error", "InternalError"}, {"message", e.what()}}).dump()
            << "\n";
        return 1;
    }
    return 2;
}

}  // namespace spage::cli
