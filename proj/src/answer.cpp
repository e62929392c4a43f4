#include "pcpo/answer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>

namespace pcpo {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) {
            out.push_back(' ');
        }
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::string erase_all(std::string s, std::string_view needle) {
    for (std::size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos)) {
        s.erase(pos, needle.size());
    }
    return s;
}

std::string normalize_once(std::string_view input) {
    std::string s = trim(input);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
        s = trim(s);
    }
    if (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
    s = erase_all(std::move(s), "\\left");
    s = erase_all(std::move(s), "\\right");
    return collapse_spaces(s);
}

// [+-]? (digits [. digits*] | . digits)
bool is_decimal_literal(std::string_view s, bool& has_point) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t int_digits = 0;
    while (i < s.size() && is_digit(s[i])) { ++i; ++int_digits; }
    has_point = false;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        has_point = true;
        ++i;
        while (i < s.size() && is_digit(s[i])) { ++i; ++frac_digits; }
    }
    return i == s.size() && int_digits + frac_digits > 0;
}

bool is_integer_literal(std::string_view s) {
    bool has_point = false;
    return is_decimal_literal(s, has_point) && !has_point;
}

std::optional<double> to_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

std::optional<NumericValue> parse_numeric(std::string_view s) {
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const std::string_view num = s.substr(0, slash);
        const std::string_view den = s.substr(slash + 1);
        if (!is_integer_literal(num) || !is_integer_literal(den)) {
            return std::nullopt;
        }
        const auto n = to_double(num);
        const auto d = to_double(den);
        if (!n || !d || *d == 0.0) {
            return std::nullopt;
        }
        return NumericValue{*n / *d, NumericKind::fraction};
    }
    bool has_point = false;
    if (!is_decimal_literal(s, has_point)) {
        return std::nullopt;
    }
    const auto v = to_double(s);
    if (!v) {
        return std::nullopt;
    }
    return NumericValue{*v, has_point ? NumericKind::decimal : NumericKind::integer};
}

}  // namespace

Answer normalize_answer(std::string_view raw) {
    Answer a;
    a.raw = std::string(raw);
    std::string current = a.raw;
    for (;;) {
        std::string next = normalize_once(current);
        if (next == current) {
            break;
        }
        current = std::move(next);
    }
    // Never let normalization erase a nonempty answer (e.g. "$" or "  ").
    a.normalized = (current.empty() && !a.raw.empty()) ? a.raw : current;
    a.numeric = parse_numeric(a.normalized);
    return a;
}

std::optional<Answer> extract_answer(std::string_view text) {
    const std::size_t marker = text.rfind(kBoxedMarker);
    if (marker == std::string_view::npos) {
        return std::nullopt;
    }
    const std::size_t open = marker + kBoxedMarker.size();
    int depth = 1;
    for (std::size_t i = open; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}' && --depth == 0) {
            return normalize_answer(text.substr(open, i - open));
        }
    }
    return std::nullopt;
}

bool answers_equal(const Answer& a, const Answer& b) {
    if (a.numeric && b.numeric) {
        const double x = a.numeric->value;
        const double y = b.numeric->value;
        const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
        if (std::fabs(x - y) <= kNumericTolerance * scale) {
            return true;
        }
    }
    return a.normalized == b.normalized;
}

std::optional<Answer> response_answer(const ResponseRecord& response) {
    if (response.answer && !response.answer->empty()) {
        return normalize_answer(*response.answer);
    }
    if (response.answer) {
        return std::nullopt;
    }
    return extract_answer(response.text);
}

Partition partition_responses(const PromptRecord& record) {
    const Answer gold = normalize_answer(record.gold_answer);
    Partition part;
    for (std::size_t n = 0; n < record.responses.size(); ++n) {
        const auto answer = response_answer(record.responses[n]);
        if (answer && answers_equal(*answer, gold)) {
            part.winners.push_back(n);
        } else {
            part.losers.push_back(n);
        }
    }
    return part;
}

}  // namespace pcpo
