#pragma once

// Final-answer extraction and a deliberately small equivalence check:
// normalized-string equality or numeric equality under a relative tolerance.
// No computer-algebra equivalence is attempted, so e.g. "\sqrt{2}" and
// "1.414" or "\frac{1}{2}" and "0.5" compare unequal.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcpo/corpus.hpp"

namespace pcpo {

/// Marker preceding the final answer in generated responses.
inline constexpr std::string_view kBoxedMarker = "boxed{";

/// Prompt template used when sampling responses; `{question}` is substituted.
inline constexpr std::string_view kResponsePromptTemplate =
    "Please reason step by step, and put your final answer within \\boxed{}.\n\n{question}";

/// Relative tolerance for numeric answer equality.
inline constexpr double kNumericTolerance = 1e-9;

enum class NumericKind { integer, decimal, fraction };

struct NumericValue {
    double value = 0.0;
    NumericKind kind = NumericKind::integer;

    bool operator==(const NumericValue&) const = default;
};

struct Answer {
    std::string raw;
    std::string normalized;
    std::optional<NumericValue> numeric;

    bool operator==(const Answer&) const = default;
};

/// Content of the last `boxed{...}` in `text`, normalized. Absent when there
/// is no marker or the braces after the last marker never balance.
std::optional<Answer> extract_answer(std::string_view text);

/// Strips surrounding whitespace, a surrounding `$...$`, `\left`/`\right`
/// markers and trailing periods, then collapses internal whitespace. Rules are
/// applied until nothing changes, so the result is a fixed point.
/// `numeric` is set when the result reads as [+-]digits[.digits] or a/b, b != 0.
Answer normalize_answer(std::string_view raw);

bool answers_equal(const Answer& a, const Answer& b);

/// Winners (Y_w) answer the gold label correctly; everything else, including
/// responses with no extractable answer, is a loser (Y_l).
struct Partition {
    std::vector<std::size_t> winners;
    std::vector<std::size_t> losers;

    std::size_t p() const noexcept { return winners.size(); }
    std::size_t q() const noexcept { return losers.size(); }
};

/// The answer a response is judged by: its pre-extracted `answer` field when
/// present, otherwise extraction from `text`. An empty `answer` counts as no answer.
std::optional<Answer> response_answer(const ResponseRecord& response);

Partition partition_responses(const PromptRecord& record);

}  // namespace pcpo
