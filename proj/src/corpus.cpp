#include "pcpo/corpus.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <unordered_set>

#include "pcpo/error.hpp"

namespace pcpo {

using json = nlohmann::ordered_json;

namespace {

class Checker {
public:
    explicit Checker(ValidationReport& report) : report_(report) {}

    void fail(std::string field, std::string message) {
        report_.violations.push_back({std::move(field), std::move(message)});
    }

    // Returns the member if it exists with the right shape, otherwise records why not.
    const json* string_field(const json& obj, std::string_view key, const std::string& path) {
        return typed_field(obj, key, path, json::value_t::string, "string");
    }
    const json* array_field(const json& obj, std::string_view key, const std::string& path) {
        return typed_field(obj, key, path, json::value_t::array, "array");
    }

    const json* count_field(const json& obj, std::string_view key, const std::string& path,
                            std::int64_t minimum) {
        const std::string field = join(path, key);
        const auto it = obj.find(key);
        if (it == obj.end()) {
            fail(field, "missing field");
            return nullptr;
        }
        if (!it->is_number_integer()) {
            fail(field, "expected integer");
            return nullptr;
        }
        if (it->is_number_unsigned()) {
            return &*it;
        }
        if (it->get<std::int64_t>() < minimum) {
            fail(field, minimum > 0 ? "must be positive" : "must be nonnegative");
            return nullptr;
        }
        return &*it;
    }

    static std::string join(const std::string& path, std::string_view key) {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }

    void response(const json& raw, const std::string& path) {
        if (!raw.is_object()) {
            fail(path, "response is not an object");
            return;
        }
        string_field(raw, "text", path);

        std::size_t token_count = 0;
        bool tokens_ok = false;
        if (const json* tokens = array_field(raw, "tokens", path)) {
            tokens_ok = true;
            token_count = tokens->size();
            if (tokens->empty()) {
                fail(join(path, "tokens"), "tokens empty");
            }
            for (std::size_t i = 0; i < tokens->size(); ++i) {
                const json& t = (*tokens)[i];
                const bool is_int = t.is_number_integer() &&
                                    (!t.is_number_unsigned() ||
                                     t.get<std::uint64_t>() <=
                                         static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()));
                if (!t.is_string() && !is_int) {
                    fail(join(path, "tokens") + "[" + std::to_string(i) + "]",
                         "token must be a string or a 64-bit integer");
                }
            }
        }

        if (const json* logprobs = array_field(raw, "logprobs", path)) {
            for (std::size_t i = 0; i < logprobs->size(); ++i) {
                const json& v = (*logprobs)[i];
                const std::string field = join(path, "logprobs") + "[" + std::to_string(i) + "]";
                if (!v.is_number()) {
                    fail(field, "logprob is not a number");
                    continue;
                }
                const double lp = v.get<double>();
                if (!std::isfinite(lp)) {
                    fail(field, "logprob not finite");
                } else if (lp > kLogprobSlack) {
                    fail(field, "logprob above bound");
                }
            }
            if (tokens_ok && logprobs->size() != token_count) {
                fail(join(path, "logprobs"), "length mismatch (tokens " + std::to_string(token_count) +
                                                 ", logprobs " + std::to_string(logprobs->size()) + ")");
            }
        }

        if (const auto it = raw.find("answer"); it != raw.end() && !it->is_null() && !it->is_string()) {
            fail(join(path, "answer"), "expected string");
        }
    }

    void nonempty_id(const json& obj, std::string_view key) {
        if (const json* id = string_field(obj, key, "")) {
            if (id->get_ref<const std::string&>().empty()) {
                fail(std::string(key), "id empty");
            } else {
                report_.record_id = id->get<std::string>();
            }
        }
    }

private:
    const json* typed_field(const json& obj, std::string_view key, const std::string& path,
                            json::value_t type, const char* type_name) {
        const std::string field = join(path, key);
        const auto it = obj.find(key);
        if (it == obj.end()) {
            fail(field, "missing field");
            return nullptr;
        }
        if (it->type() != type) {
            fail(field, std::string("expected ") + type_name);
            return nullptr;
        }
        return &*it;
    }

    ValidationReport& report_;
};

Token token_from_json(const json& t) {
    if (t.is_string()) {
        return t.get<std::string>();
    }
    return t.get<std::int64_t>();
}

ResponseRecord response_from_json(const json& raw) {
    ResponseRecord r;
    r.text = raw.at("text").get<std::string>();
    const json& tokens = raw.at("tokens");
    r.tokens.reserve(tokens.size());
    for (const json& t : tokens) {
        r.tokens.push_back(token_from_json(t));
    }
    r.logprobs = raw.at("logprobs").get<std::vector<double>>();
    if (const auto it = raw.find("answer"); it != raw.end() && it->is_string()) {
        r.answer = it->get<std::string>();
    }
    return r;
}

std::string describe(std::size_t line, const ValidationReport& report) {
    std::string msg = "line " + std::to_string(line) + ": ";
    if (!report.record_id.empty()) {
        msg += "record '" + report.record_id + "': ";
    }
    const Violation& v = report.violations.front();
    msg += v.field.empty() ? v.message : v.field + ": " + v.message;
    if (report.violations.size() > 1) {
        msg += " (+" + std::to_string(report.violations.size() - 1) + " more)";
    }
    return msg;
}

bool blank(std::string_view line) {
    return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

template <typename Record, typename Validate, typename Convert>
std::vector<Record> parse_lines(std::istream& in, Validate validate, Convert convert,
                                std::string_view id_key) {
    std::vector<Record> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        json raw;
        try {
            raw = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
        const ValidationReport report = validate(raw);
        if (!report.ok()) {
            throw SchemaError(describe(line_no, report));
        }
        if (!id_key.empty() && !seen.insert(report.record_id).second) {
            throw SchemaError("line " + std::to_string(line_no) + ": record '" + report.record_id +
                              "': " + std::string(id_key) + ": duplicate id");
        }
        out.push_back(convert(raw));
    }
    if (in.bad()) {
        throw IoError("read failed after line " + std::to_string(line_no));
    }
    return out;
}

template <typename Record>
std::size_t write_lines(std::span<const Record> records, std::ostream& out) {
    std::size_t written = 0;
    for (const Record& r : records) {
        out << to_json(r).dump() << '\n';
        if (!out) {
            throw WriteError("write failed after " + std::to_string(written) + " of " +
                                 std::to_string(records.size()) + " records",
                             written);
        }
        ++written;
    }
    out.flush();
    if (!out) {
        throw WriteError("flush failed; " + std::to_string(written) + " records may be incomplete", written);
    }
    return written;
}

}  // namespace

ValidationReport validate_record(const json& raw) {
    ValidationReport report;
    Checker check(report);
    if (!raw.is_object()) {
        check.fail("", "record is not an object");
        return report;
    }
    check.nonempty_id(raw, "id");
    check.string_field(raw, "question", "");
    check.string_field(raw, "gold_answer", "");
    if (const json* responses = check.array_field(raw, "responses", "")) {
        if (responses->empty()) {
            check.fail("responses", "responses empty");
        }
        for (std::size_t i = 0; i < responses->size(); ++i) {
            check.response((*responses)[i], "responses[" + std::to_string(i) + "]");
        }
    }
    return report;
}

ValidationReport validate_pair(const json& raw) {
    ValidationReport report;
    Checker check(report);
    if (!raw.is_object()) {
        check.fail("", "record is not an object");
        return report;
    }
    check.nonempty_id(raw, "prompt_id");
    check.string_field(raw, "question", "");

    std::size_t chosen_len = 0;
    std::size_t rejected_len = 0;
    for (const char* side : {"chosen", "rejected"}) {
        const auto it = raw.find(side);
        if (it == raw.end()) {
            check.fail(side, "missing field");
            continue;
        }
        const std::size_t before = report.violations.size();
        check.response(*it, side);
        if (report.violations.size() == before) {
            (std::string_view(side) == "chosen" ? chosen_len : rejected_len) = it->at("tokens").size();
        }
    }

    const json* matched = check.count_field(raw, "matched_token_count", "", 0);
    check.count_field(raw, "levenshtein_distance", "", 0);
    check.count_field(raw, "levenshtein_rank", "", 1);

    const auto s_it = raw.find("s_w");
    if (s_it == raw.end()) {
        check.fail("s_w", "missing field");
    } else if (!s_it->is_number()) {
        check.fail("s_w", "expected number");
    } else {
        const double s_w = s_it->get<double>();
        if (!std::isfinite(s_w) || s_w < 0.0 || s_w > 1.0) {
            check.fail("s_w", "s_w out of range [0, 1]");
        } else if (matched != nullptr && rejected_len > 0) {
            const auto m = matched->get<std::uint64_t>();
            if (m > std::min(chosen_len, rejected_len)) {
                check.fail("matched_token_count", "exceeds sequence length");
            } else if (s_w > static_cast<double>(m) / static_cast<double>(rejected_len) + 1e-12) {
                check.fail("s_w", "s_w exceeds matched fraction of rejected tokens");
            }
        }
    }
    return report;
}

std::vector<LineReport> validate_corpus(std::istream& in) {
    std::vector<LineReport> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        LineReport entry;
        entry.line = line_no;
        try {
            entry.report = validate_record(json::parse(line));
            if (!entry.report.record_id.empty() && !seen.insert(entry.report.record_id).second) {
                entry.report.violations.push_back({"id", "duplicate id"});
            }
        } catch (const json::exception& e) {
            entry.parse_error = std::string("malformed JSON: ") + e.what();
        }
        out.push_back(std::move(entry));
    }
    if (in.bad()) {
        throw IoError("read failed after line " + std::to_string(line_no));
    }
    return out;
}

PromptRecord prompt_from_json(const json& raw) {
    PromptRecord r;
    r.id = raw.at("id").get<std::string>();
    r.question = raw.at("question").get<std::string>();
    r.gold_answer = raw.at("gold_answer").get<std::string>();
    for (const json& resp : raw.at("responses")) {
        r.responses.push_back(response_from_json(resp));
    }
    return r;
}

SelectedPair pair_from_json(const json& raw) {
    SelectedPair p;
    p.prompt_id = raw.at("prompt_id").get<std::string>();
    p.question = raw.at("question").get<std::string>();
    p.chosen = response_from_json(raw.at("chosen"));
    p.rejected = response_from_json(raw.at("rejected"));
    p.s_w = raw.at("s_w").get<double>();
    p.matched_token_count = raw.at("matched_token_count").get<std::size_t>();
    p.levenshtein_distance = raw.at("levenshtein_distance").get<std::size_t>();
    p.levenshtein_rank = raw.at("levenshtein_rank").get<std::size_t>();
    return p;
}

std::vector<PromptRecord> parse_corpus(std::istream& in) {
    return parse_lines<PromptRecord>(in, validate_record, prompt_from_json, "id");
}

std::vector<SelectedPair> parse_pairs(std::istream& in) {
    // Pair files legitimately repeat prompt ids, one line per rejected response.
    return parse_lines<SelectedPair>(in, validate_pair, pair_from_json, "");
}

json to_json(const Token& token) {
    return std::visit([](const auto& v) { return json(v); }, token);
}

json to_json(const ResponseRecord& response) {
    json tokens = json::array();
    for (const Token& t : response.tokens) {
        tokens.push_back(to_json(t));
    }
    json out = {
        {"text", response.text},
        {"tokens", std::move(tokens)},
        {"logprobs", response.logprobs},
    };
    if (response.answer) {
        out["answer"] = *response.answer;
    }
    return out;
}

json to_json(const PromptRecord& record) {
    json responses = json::array();
    for (const ResponseRecord& r : record.responses) {
        responses.push_back(to_json(r));
    }
    return {
        {"id", record.id},
        {"question", record.question},
        {"gold_answer", record.gold_answer},
        {"responses", std::move(responses)},
    };
}

json to_json(const SelectedPair& pair) {
    return {
        {"prompt_id", pair.prompt_id},
        {"question", pair.question},
        {"chosen", to_json(pair.chosen)},
        {"rejected", to_json(pair.rejected)},
        {"s_w", pair.s_w},
        {"matched_token_count", pair.matched_token_count},
        {"levenshtein_distance", pair.levenshtein_distance},
        {"levenshtein_rank", pair.levenshtein_rank},
    };
}

std::size_t write_pairs(std::span<const SelectedPair> pairs, std::ostream& out) {
    return write_lines(pairs, out);
}

std::size_t write_corpus(std::span<const PromptRecord> records, std::ostream& out) {
    return write_lines(records, out);
}

}  // namespace pcpo
