#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spage/engine.hpp"
#include "spage/llm.hpp"
#include "spage/metrics.hpp"

namespace spage {

struct EvalResult {
    double bleu = 0;          // 0..100, corpus-level
    double rouge_l_f1 = 0;    // 0..1, mean over pairs
    double esr = 0;           // 0..1, pooled over steps
    double avg_cycles_seq = 0;
    double avg_cycles_graph = 0;

    nlohmann::ordered_json to_json() const {
        return {{"bleu", bleu},
                {"rouge_l_f1", rouge_l_f1},
                {"esr", esr},
                {"avg_cycles_seq", avg_cycles_seq},
                {"avg_cycles_graph", avg_cycles_graph},
                {"tokenizer", METRIC_TOKENIZER_VERSION}};
    }

    std::string to_tsv() const {
        return "bleu\trouge_l_f1\tesr\tavg_cycles_seq\tavg_cycles_graph\n" +
               format_real(bleu) + "\t" + format_real(rouge_l_f1) + "\t" + format_real(esr) +
               "\t" + format_real(avg_cycles_seq) + "\t" + format_real(avg_cycles_graph) + "\n";
    }
};

struct TaskOutput {
    std::string summary;
    ExecutionReport report;
};

// Join summaries with their execution reports: corpus BLEU over all pairs,
// mean ROUGE-L, pooled ESR, and cycle averages (sequential = step count,
// graph = DAG depth).
inline EvalResult evaluate_batch(const std::vector<SummarizationTask>& tasks,
                                 const std::vector<TaskOutput>& outputs) {
    if (tasks.empty()) throw EmptyInput("no tasks to evaluate");
    if (tasks.size() != outputs.size())
        throw LengthMismatch("got " + std::to_string(tasks.size()) + " tasks but " +
                             std::to_string(outputs.size()) + " outputs");
    std::vector<std::pair<std::string, std::vector<std::string>>> bleu_pairs;
    double rouge_sum = 0;
    size_t steps_total = 0, steps_success = 0;
    double cycles_seq = 0, cycles_graph = 0;
    for (size_t i = 0; i < tasks.size(); ++i) {
        if (!tasks[i].reference_summary)
            throw MissingReference("task " + std::to_string(i + 1) + " has no reference summary");
        bleu_pairs.push_back({outputs[i].summary, {*tasks[i].reference_summary}});
        rouge_sum += rouge_l_f1(outputs[i].summary, *tasks[i].reference_summary);
        steps_total += outputs[i].report.step_count();
        steps_success += outputs[i].report.success_count();
        cycles_seq += double(outputs[i].report.step_count());
        cycles_graph += double(outputs[i].report.graph_depth);
    }
    EvalResult out;
    out.bleu = corpus_bleu(bleu_pairs).score;
    out.rouge_l_f1 = rouge_sum / double(tasks.size());
    out.esr = steps_total ? double(steps_success) / double(steps_total) : 0.0;
    out.avg_cycles_seq = cycles_seq / double(tasks.size());
    out.avg_cycles_graph = cycles_graph / double(tasks.size());
    return out;
}

}  // namespace spage
