#pragma once

// End-to-end orchestration behind the `pcpo` command line tool:
// parse -> partition -> candidates -> match -> score -> select -> emit,
// the rank-distribution report, and the loss verification harness.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcpo/candidates.hpp"
#include "pcpo/corpus.hpp"
#include "pcpo/loss.hpp"

namespace pcpo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInternal = 4;

inline constexpr std::uint64_t kDefaultSeed = 20240617;
inline constexpr std::string_view kTieBreakPolicy = "max-s_w,min-rank,min-chosen-index";

struct PipelineConfig {
    std::string input;
    std::string output;
    std::size_t k = kDefaultTopK;
    double min_s_w = 0.0;
    std::optional<std::string> report;
    unsigned jobs = 1;  // 0 = one per hardware thread
    std::uint64_t seed = kDefaultSeed;
};

/// Throws std::invalid_argument naming the offending field.
void validate_config(const PipelineConfig& config, bool needs_output);

struct RunSummary {
    std::size_t prompts = 0;
    std::size_t all_correct_prompts = 0;  // q == 0
    std::size_t all_wrong_prompts = 0;    // p == 0
    std::size_t rejected_total = 0;       // losers in prompts with p > 0 and q > 0
    std::size_t rejected_without_candidates = 0;
    std::size_t rejected_below_threshold = 0;
    std::size_t pairs_emitted = 0;

    bool operator==(const RunSummary&) const = default;
};

struct SelectionRun {
    std::vector<SelectedPair> pairs;  // prompt order, then rejected index
    RunSummary summary;
};

/// Selection for a single prompt; `summary.prompts` is 1.
SelectionRun select_prompt(const PromptRecord& record, std::size_t k, double min_s_w);

/// Prompts are processed on `jobs` threads; the output never depends on it.
SelectionRun select_corpus(std::span<const PromptRecord> corpus, std::size_t k, double min_s_w,
                           unsigned jobs);

struct ParetoReport {
    std::map<std::size_t, double> rank_frequencies;
    std::map<std::size_t, double> cumulative;
    std::size_t total_pairs = 0;
    std::optional<std::size_t> skipped_prompts;  // unknown when built from a pairs file alone
};

ParetoReport pareto_report(std::span<const SelectedPair> pairs);

struct LossCheckReport {
    std::size_t pairs_checked = 0;
    std::size_t vocab_size = 0;
    std::uint64_t seed = 0;
    GradCheckReport gradient;
    double reduction_max_abs_error = 0.0;
    bool reduction_passed = true;

    bool passed() const noexcept { return gradient.passed && reduction_passed; }
};

inline constexpr std::size_t kLossCheckVocab = 8;
inline constexpr double kLossCheckStep = 1e-5;
inline constexpr double kLossCheckTolerance = 1e-5;
inline constexpr double kReductionTolerance = 1e-12;

/// Token -> toy vocabulary index in [1, vocab) by stable hashing (0 is BOS).
TokenSequence map_to_toy_vocab(std::span<const Token> tokens, std::size_t vocab_size);

/// Gradient check and the DPO reduction identity over `pairs`, on toy models
/// drawn from `seed`.
LossCheckReport loss_check(std::span<const SelectedPair> pairs, std::uint64_t seed,
                           const LossConfig& config = {});

nlohmann::ordered_json to_json(const RunSummary& summary);
nlohmann::ordered_json to_json(const ParetoReport& report);
nlohmann::ordered_json to_json(const LossCheckReport& report);

/// Plain-text config: one `key = value` per line, `#` starts a comment.
/// Keys are the long flag names without dashes (input, output, k, min-s-w,
/// report, seed, jobs). Throws SchemaError on a malformed line or unknown key.
std::map<std::string, std::string> parse_config(std::istream& in);

// File-level entry points used by the CLI. They throw SchemaError / IoError.
SelectionRun run_select(const PipelineConfig& config);
ParetoReport run_stats(const std::string& pairs_path);
LossCheckReport run_loss_check(const std::string& pairs_path, std::uint64_t seed);

}  // namespace pcpo
