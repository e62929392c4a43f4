#pragma once

// Prompt/response records and their line-delimited JSON encoding.
//
// Input, one prompt per line:
//   {"id": str, "question": str, "gold_answer": str,
//    "responses": [{"text": str, "tokens": [str|int], "logprobs": [float], "answer": str?}]}
//
// `tokens` must cover the response only (no prompt-template tokens) and
// `logprobs` holds the natural-log probability of each of those tokens.
//
// Output, one selected pair per line:
//   {"prompt_id", "question", "chosen": response, "rejected": response, "s_w",
//    "matched_token_count", "levenshtein_distance", "levenshtein_rank"}

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcpo/token.hpp"

namespace pcpo {

/// Upper bound accepted for a log-probability. Inference stacks occasionally
/// emit tiny positive values from rounding.
inline constexpr double kLogprobSlack = 1e-9;

struct ResponseRecord {
    std::string text;
    std::vector<Token> tokens;
    std::vector<double> logprobs;
    std::optional<std::string> answer;

    bool operator==(const ResponseRecord&) const = default;
};

struct PromptRecord {
    std::string id;
    std::string question;
    std::string gold_answer;
    std::vector<ResponseRecord> responses;

    bool operator==(const PromptRecord&) const = default;
};

struct SelectedPair {
    std::string prompt_id;
    std::string question;
    ResponseRecord chosen;
    ResponseRecord rejected;
    double s_w = 0.0;
    std::size_t matched_token_count = 0;
    std::size_t levenshtein_distance = 0;
    std::size_t levenshtein_rank = 1;

    bool operator==(const SelectedPair&) const = default;
};

struct Violation {
    std::string field;    // JSON path, e.g. "responses[2].logprobs[7]"
    std::string message;  // e.g. "logprob above bound"
};

struct ValidationReport {
    std::string record_id;  // empty when the id itself is missing or invalid
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Every invariant violated by one raw prompt line. Never throws.
ValidationReport validate_record(const nlohmann::ordered_json& raw);

/// Every invariant violated by one raw selected-pair line. Never throws.
ValidationReport validate_pair(const nlohmann::ordered_json& raw);

/// Result of validating a whole stream without stopping at the first problem.
struct LineReport {
    std::size_t line = 0;  // 1-based
    std::optional<std::string> parse_error;
    ValidationReport report;

    bool ok() const noexcept { return !parse_error && report.ok(); }
};

std::vector<LineReport> validate_corpus(std::istream& in);

/// Parse a prompt corpus. Blank lines are skipped; record order is preserved
/// and nothing is deduplicated. Throws SchemaError naming the line, record id
/// and field on the first malformed or invalid line, or on a repeated id.
std::vector<PromptRecord> parse_corpus(std::istream& in);

/// Parse a selected-pair file; same error contract as parse_corpus.
std::vector<SelectedPair> parse_pairs(std::istream& in);

/// Writes one JSON object per line. Throws WriteError carrying the number of
/// complete lines written if the sink fails.
std::size_t write_pairs(std::span<const SelectedPair> pairs, std::ostream& out);

std::size_t write_corpus(std::span<const PromptRecord> records, std::ostream& out);

nlohmann::ordered_json to_json(const Token& token);
nlohmann::ordered_json to_json(const ResponseRecord& response);
nlohmann::ordered_json to_json(const PromptRecord& record);
nlohmann::ordered_json to_json(const SelectedPair& pair);

/// Conversions from already validated JSON.
PromptRecord prompt_from_json(const nlohmann::ordered_json& raw);
SelectedPair pair_from_json(const nlohmann::ordered_json& raw);

}  // namespace pcpo
