#include "pcpo/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "pcpo/alignment.hpp"
#include "pcpo/answer.hpp"
#include "pcpo/error.hpp"
#include "pcpo/scoring.hpp"

namespace pcpo {
namespace {

using json = nlohmann::ordered_json;

void add(RunSummary& into, const RunSummary& from) {
    into.prompts += from.prompts;
    into.all_correct_prompts += from.all_correct_prompts;
    into.all_wrong_prompts += from.all_wrong_prompts;
    into.rejected_total += from.rejected_total;
    into.rejected_without_candidates += from.rejected_without_candidates;
    into.rejected_below_threshold += from.rejected_below_threshold;
    into.pairs_emitted += from.pairs_emitted;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open input '" + path + "'");
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open output '" + path + "'");
    }
    return out;
}

std::vector<SelectedPair> read_pairs(const std::string& path) {
    std::ifstream in = open_input(path);
    return parse_pairs(in);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void validate_config(const PipelineConfig& config, bool needs_output) {
    if (config.input.empty()) {
        throw std::invalid_argument("input path is empty");
    }
    if (needs_output && config.output.empty()) {
        throw std::invalid_argument("output path is empty");
    }
    if (config.k == 0) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (!(config.min_s_w >= 0.0 && config.min_s_w <= 1.0)) {
        throw std::invalid_argument("min-s-w must lie in [0, 1]");
    }
}

SelectionRun select_prompt(const PromptRecord& record, std::size_t k, double min_s_w) {
    SelectionRun run;
    run.summary.prompts = 1;

    const Partition part = partition_responses(record);
    if (part.q() == 0) {
        run.summary.all_correct_prompts = 1;
        return run;
    }
    if (part.p() == 0) {
        run.summary.all_wrong_prompts = 1;
        return run;
    }
    run.summary.rejected_total = part.q();

    TokenTable table;
    std::vector<std::vector<TokenId>> ids;
    ids.reserve(record.responses.size());
    for (const ResponseRecord& r : record.responses) {
        ids.push_back(table.intern(r.tokens));
    }

    std::vector<ScoredGroup> groups;
    for (const LoserCandidates& loser : build_candidates(part, ids, k)) {
        ScoredGroup group{loser.rejected_index, {}};
        const ResponseRecord& rejected = record.responses[loser.rejected_index];
        for (const CandidatePair& c : loser.candidates) {
            ScoredPair scored = pair_weighted_score(record.responses[c.chosen_index], rejected,
                                                    match_tokens(ids[c.chosen_index], ids[c.rejected_index]));
            scored.candidate = c;
            group.candidates.push_back(std::move(scored));
        }
        groups.push_back(std::move(group));
    }

    const SelectionOutcome outcome = select_pairs(groups);
    run.summary.rejected_without_candidates = outcome.skipped.size();
    for (const auto& [rejected_index, sel] : outcome.selected) {
        if (sel.s_w < min_s_w) {
            ++run.summary.rejected_below_threshold;
            continue;
        }
        run.pairs.push_back({record.id, record.question, record.responses[sel.chosen_index],
                             record.responses[rejected_index], sel.s_w, sel.matched_token_count,
                             sel.distance, sel.rank});
    }
    run.summary.pairs_emitted = run.pairs.size();
    return run;
}

SelectionRun select_corpus(std::span<const PromptRecord> corpus, std::size_t k, double min_s_w,
                           unsigned jobs) {
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(corpus.size(), 1)));

    std::vector<SelectionRun> per_prompt(corpus.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (std::size_t i = next++; i < corpus.size() && !failed; i = next++) {
            try {
                per_prompt[i] = select_prompt(corpus[i], k, min_s_w);
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    SelectionRun run;
    for (SelectionRun& r : per_prompt) {
        add(run.summary, r.summary);
        std::move(r.pairs.begin(), r.pairs.end(), std::back_inserter(run.pairs));
    }
    return run;
}

ParetoReport pareto_report(std::span<const SelectedPair> pairs) {
    ParetoReport report;
    report.total_pairs = pairs.size();
    if (pairs.empty()) {
        return report;
    }
    std::map<std::size_t, std::size_t> counts;
    for (const SelectedPair& p : pairs) {
        ++counts[p.levenshtein_rank];
    }
    const auto total = static_cast<double>(pairs.size());
    std::size_t running = 0;
    for (const auto& [rank, count] : counts) {
        running += count;
        report.rank_frequencies[rank] = static_cast<double>(count) / total;
        report.cumulative[rank] = static_cast<double>(running) / total;
    }
    return report;
}

TokenSequence map_to_toy_vocab(std::span<const Token> tokens, std::size_t vocab_size) {
    if (vocab_size < 2) {
        throw std::invalid_argument("toy vocabulary needs BOS plus at least one token");
    }
    TokenSequence out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) {
        out.push_back(1 + static_cast<std::size_t>(stable_hash(t) % (vocab_size - 1)));
    }
    return out;
}

LossCheckReport loss_check(std::span<const SelectedPair> pairs, std::uint64_t seed, const LossConfig& config) {
    LossCheckReport report;
    report.pairs_checked = pairs.size();
    report.vocab_size = kLossCheckVocab;
    report.seed = seed;

    const ToyModel reference = ToyModel::random(kLossCheckVocab, seed);
    const ToyModel policy = ToyModel::random(kLossCheckVocab, seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<TrainingPair> toy;
    toy.reserve(pairs.size());
    for (const SelectedPair& p : pairs) {
        toy.push_back({map_to_toy_vocab(p.chosen.tokens, kLossCheckVocab),
                       map_to_toy_vocab(p.rejected.tokens, kLossCheckVocab), p.s_w});
    }

    report.gradient = grad_check(policy, reference, toy, config, kLossCheckStep, kLossCheckTolerance);

    const LossConfig dpo_only{0.0, config.beta};
    for (const TrainingPair& t : toy) {
        const double weighted = pcpo_loss(policy, reference, t.chosen, t.rejected, 1.0, dpo_only);
        const double plain = dpo_loss(policy, reference, t.chosen, t.rejected, config);
        report.reduction_max_abs_error = std::max(report.reduction_max_abs_error, std::fabs(weighted - plain));
    }
    report.reduction_passed = report.reduction_max_abs_error <= kReductionTolerance;
    return report;
}

json to_json(const RunSummary& s) {
    return {
        {"prompts", s.prompts},
        {"all_correct_prompts", s.all_correct_prompts},
        {"all_wrong_prompts", s.all_wrong_prompts},
        {"rejected_total", s.rejected_total},
        {"rejected_without_candidates", s.rejected_without_candidates},
        {"rejected_below_threshold", s.rejected_below_threshold},
        {"pairs_emitted", s.pairs_emitted},
    };
}

json to_json(const ParetoReport& r) {
    json freq = json::object();
    json cum = json::object();
    for (const auto& [rank, f] : r.rank_frequencies) {
        freq[std::to_string(rank)] = f;
    }
    for (const auto& [rank, c] : r.cumulative) {
        cum[std::to_string(rank)] = c;
    }
    json out = {
        {"total_pairs", r.total_pairs},
        {"skipped_prompts", nullptr},
        {"rank_frequencies", std::move(freq)},
        {"cumulative", std::move(cum)},
    };
    if (r.skipped_prompts) {
        out["skipped_prompts"] = *r.skipped_prompts;
    }
    return out;
}

json to_json(const LossCheckReport& r) {
    auto entry = [](const GradCheckEntry& e) {
        return json{{"pair", e.pair},           {"row", e.row},
                    {"col", e.col},             {"analytic", e.analytic},
                    {"numeric", e.numeric},     {"rel_error", e.rel_error}};
    };
    json worst = json::array();
    for (const auto& e : r.gradient.worst) {
        worst.push_back(entry(e));
    }
    json failures = json::array();
    for (const auto& e : r.gradient.failures) {
        failures.push_back(entry(e));
    }
    return {
        {"passed", r.passed()},
        {"pairs_checked", r.pairs_checked},
        {"vocab_size", r.vocab_size},
        {"seed", r.seed},
        {"gradient",
         {{"passed", r.gradient.passed},
          {"step", kLossCheckStep},
          {"tolerance", kLossCheckTolerance},
          {"entries_checked", r.gradient.entries_checked},
          {"max_rel_error", r.gradient.max_rel_error},
          {"worst", std::move(worst)},
          {"failures", std::move(failures)}}},
        {"reduction",
         {{"passed", r.reduction_passed},
          {"tolerance", kReductionTolerance},
          {"max_abs_error", r.reduction_max_abs_error}}},
    };
}

std::map<std::string, std::string> parse_config(std::istream& in) {
    static const std::vector<std::string> known = {"input", "output", "k", "min-s-w", "report", "seed", "jobs"};
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw SchemaError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw SchemaError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

SelectionRun run_select(const PipelineConfig& config) {
    validate_config(config, true);
    std::vector<PromptRecord> corpus;
    {
        std::ifstream in = open_input(config.input);
        corpus = parse_corpus(in);
    }
    SelectionRun run = select_corpus(corpus, config.k, config.min_s_w, config.jobs);

    {
        std::ofstream out = open_output(config.output);
        write_pairs(run.pairs, out);
    }
    if (config.report) {
        ParetoReport pareto = pareto_report(run.pairs);
        pareto.skipped_prompts = run.summary.all_correct_prompts + run.summary.all_wrong_prompts;
        std::ofstream out = open_output(*config.report);
        out << json{{"summary", to_json(run.summary)}, {"pareto", to_json(pareto)}}.dump(2) << '\n';
        if (!out.flush()) {
            throw IoError("failed to write report '" + *config.report + "'");
        }
    }
    return run;
}

ParetoReport run_stats(const std::string& pairs_path) {
    return pareto_report(read_pairs(pairs_path));
}

LossCheckReport run_loss_check(const std::string& pairs_path, std::uint64_t seed) {
    return loss_check(read_pairs(pairs_path), seed);
}

}  // namespace pcpo
