#include <gtest/gtest.h>

#include <sstream>
#include <streambuf>
#include <string>

#include "pcpo/corpus.hpp"
#include "pcpo/error.hpp"
#include "support/generators.hpp"

namespace {

using json = nlohmann::ordered_json;
using pcpo::SchemaError;

json valid_record() {
    return json::parse(R"({"id": "q1", "question": "2+2?", "gold_answer": "4", "responses": [
        {"text": "boxed{4}", "tokens": ["boxed{4}"], "logprobs": [-0.1]},
        {"text": "it is boxed{5}", "tokens": ["it", "is", 7], "logprobs": [-0.5, 0.0, -1e-10], "answer": "5"}]})");
}

bool has_violation(const pcpo::ValidationReport& r, const std::string& field, const std::string& message) {
    for (const auto& v : r.violations) {
        if (v.field == field && v.message.find(message) != std::string::npos) return true;
    }
    return false;
}

std::string dump_violations(const pcpo::ValidationReport& r) {
    std::string s;
    for (const auto& v : r.violations) s += v.field + ": " + v.message + "\n";
    return s;
}

#define EXPECT_VIOLATION(report, field, message) \
    EXPECT_TRUE(has_violation(report, field, message)) << dump_violations(report)

TEST(ValidateRecord, ValidRecordIsOk) {
    const auto r = pcpo::validate_record(valid_record());
    EXPECT_TRUE(r.ok()) << dump_violations(r);
    EXPECT_EQ(r.record_id, "q1");
}

TEST(ValidateRecord, LogprobAboveBound) {
    auto raw = valid_record();
    raw["responses"][1]["logprobs"][1] = 0.5;
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[1].logprobs[1]", "logprob above bound");
}

TEST(ValidateRecord, SlackAcceptsTinyPositiveLogprob) {
    auto raw = valid_record();
    raw["responses"][0]["logprobs"][0] = 1e-9;
    EXPECT_TRUE(pcpo::validate_record(raw).ok());
    raw["responses"][0]["logprobs"][0] = 2e-9;
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].logprobs[0]", "logprob above bound");
}

TEST(ValidateRecord, ResponsesEmpty) {
    auto raw = valid_record();
    raw["responses"] = json::array();
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses", "responses empty");
}

TEST(ValidateRecord, TokensEmpty) {
    auto raw = valid_record();
    raw["responses"][0]["tokens"] = json::array();
    raw["responses"][0]["logprobs"] = json::array();
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].tokens", "tokens empty");
}

TEST(ValidateRecord, LengthMismatch) {
    auto raw = valid_record();
    raw["responses"][1]["logprobs"] = json::array({-0.1, -0.2});
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[1].logprobs", "length mismatch (tokens 3, logprobs 2)");
}

TEST(ValidateRecord, NonFiniteLogprob) {
    auto raw = valid_record();
    raw["responses"][0]["logprobs"][0] = -std::numeric_limits<double>::infinity();
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].logprobs[0]", "logprob not finite");
}

TEST(ValidateRecord, LogprobNotANumber) {
    auto raw = valid_record();
    raw["responses"][0]["logprobs"][0] = "-0.1";
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].logprobs[0]", "logprob is not a number");
}

TEST(ValidateRecord, BadTokenKinds) {
    auto raw = valid_record();
    raw["responses"][0]["tokens"][0] = 1.5;
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].tokens[0]", "token must be a string or a 64-bit integer");
    raw["responses"][0]["tokens"][0] = json::array();
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].tokens[0]", "token must be a string or a 64-bit integer");
    raw["responses"][0]["tokens"][0] = 18446744073709551615ULL;
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0].tokens[0]", "token must be a string or a 64-bit integer");
}

TEST(ValidateRecord, MissingAndMistypedFields) {
    auto raw = valid_record();
    raw.erase("question");
    raw["gold_answer"] = 4;
    raw["responses"][0].erase("text");
    raw["responses"][1]["answer"] = 5;
    const auto r = pcpo::validate_record(raw);
    EXPECT_VIOLATION(r, "question", "missing field");
    EXPECT_VIOLATION(r, "gold_answer", "expected string");
    EXPECT_VIOLATION(r, "responses[0].text", "missing field");
    EXPECT_VIOLATION(r, "responses[1].answer", "expected string");
    EXPECT_EQ(r.violations.size(), 4u);
}

TEST(ValidateRecord, IdProblems) {
    auto raw = valid_record();
    raw["id"] = "";
    auto r = pcpo::validate_record(raw);
    EXPECT_VIOLATION(r, "id", "id empty");
    EXPECT_TRUE(r.record_id.empty());
    raw.erase("id");
    EXPECT_VIOLATION(pcpo::validate_record(raw), "id", "missing field");
}

TEST(ValidateRecord, NotAnObject) {
    EXPECT_FALSE(pcpo::validate_record(json::array({1, 2})).ok());
    auto raw = valid_record();
    raw["responses"][0] = "text";
    EXPECT_VIOLATION(pcpo::validate_record(raw), "responses[0]", "response is not an object");
}

TEST(ValidateRecord, ReportsEveryViolationAtOnce) {
    auto raw = valid_record();
    raw["responses"][0]["logprobs"][0] = 3.0;
    raw["responses"][1]["logprobs"][0] = 0.25;
    raw["responses"][1]["logprobs"][2] = 1.0;
    EXPECT_EQ(pcpo::validate_record(raw).violations.size(), 3u);
}

TEST(ParseCorpus, OneLineTwoResponses) {
    std::istringstream in(valid_record().dump() + "\n");
    const auto records = pcpo::parse_corpus(in);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].id, "q1");
    ASSERT_EQ(records[0].responses.size(), 2u);
    EXPECT_EQ(records[0].responses[1].tokens[2], pcpo::Token{std::int64_t{7}});
    EXPECT_EQ(records[0].responses[1].answer, std::optional<std::string>("5"));
    EXPECT_FALSE(records[0].responses[0].answer.has_value());
}

TEST(ParseCorpus, EmptyStream) {
    std::istringstream in("");
    EXPECT_TRUE(pcpo::parse_corpus(in).empty());
    std::istringstream blank("\n  \n");
    EXPECT_TRUE(pcpo::parse_corpus(blank).empty());
}

TEST(ParseCorpus, LengthMismatchNamesRecordAndLine) {
    auto raw = valid_record();
    raw["responses"][1]["logprobs"] = json::array({-0.1, -0.2});
    std::istringstream in("\n" + raw.dump() + "\n");
    try {
        pcpo::parse_corpus(in);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("length mismatch"), std::string::npos) << msg;
        EXPECT_NE(msg.find("'q1'"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    }
}

TEST(ParseCorpus, MalformedLineNamesLine) {
    std::istringstream in(valid_record().dump() + "\n{\"id\": \n");
    try {
        pcpo::parse_corpus(in);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2: malformed JSON"), std::string::npos) << e.what();
    }
}

TEST(ParseCorpus, OverflowingNumberIsASchemaError) {
    auto raw = valid_record();
    std::string text = raw.dump();
    const std::string first = raw["responses"][0]["logprobs"][0].dump();
    text.replace(text.find(first), first.size(), "-1e999");
    std::istringstream in(text + "\n");
    try {
        pcpo::parse_corpus(in);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1: malformed JSON"), std::string::npos) << e.what();
    }
    std::istringstream again(text + "\n");
    const auto lines = pcpo::validate_corpus(again);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_TRUE(lines[0].parse_error.has_value());
}

TEST(ParseCorpus, DuplicateIdRejected) {
    std::istringstream in(valid_record().dump() + "\n" + valid_record().dump() + "\n");
    EXPECT_THROW(pcpo::parse_corpus(in), SchemaError);
}

TEST(ParseCorpus, KeepsOrderAndDuplicateResponses) {
    auto a = valid_record();
    a["id"] = "b";
    a["responses"][1] = a["responses"][0];
    auto b = valid_record();
    b["id"] = "a";
    std::istringstream in(a.dump() + "\n" + b.dump() + "\n");
    const auto records = pcpo::parse_corpus(in);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].id, "b");
    EXPECT_EQ(records[1].id, "a");
    EXPECT_EQ(records[0].responses[0], records[0].responses[1]);
}

TEST(ValidateCorpus, CollectsEveryLine) {
    auto bad = valid_record();
    bad["id"] = "q2";
    bad["responses"] = json::array();
    std::istringstream in(valid_record().dump() + "\nnot json\n" + bad.dump() + "\n" + valid_record().dump() + "\n");
    const auto lines = pcpo::validate_corpus(in);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_TRUE(lines[0].ok());
    EXPECT_TRUE(lines[1].parse_error.has_value());
    EXPECT_EQ(lines[2].report.record_id, "q2");
    EXPECT_FALSE(lines[2].ok());
    EXPECT_VIOLATION(lines[3].report, "id", "duplicate id");
}

pcpo::SelectedPair sample_pair(double s_w) {
    pcpo::SelectedPair p;
    p.prompt_id = "q1";
    p.question = "2+2?";
    p.chosen = {"a b boxed{4}", {"a", "b", "boxed{4}"}, {-0.1, -0.2, -0.3}, std::nullopt};
    p.rejected = {"a c d boxed{5}", {"a", std::int64_t{-3}, "d", "boxed{5}"}, {-0.1, -0.4, -0.2, -2.0}, "5"};
    p.s_w = s_w;
    p.matched_token_count = 2;
    p.levenshtein_distance = 2;
    p.levenshtein_rank = 1;
    return p;
}

TEST(WritePairs, ZeroPairs) {
    std::ostringstream out;
    EXPECT_EQ(pcpo::write_pairs({}, out), 0u);
    EXPECT_TRUE(out.str().empty());
}

TEST(WritePairs, ThreePairsRoundTrip) {
    std::vector<pcpo::SelectedPair> pairs{sample_pair(0.375), sample_pair(0.1), sample_pair(0.0)};
    pairs[1].levenshtein_rank = 3;
    std::ostringstream out;
    EXPECT_EQ(pcpo::write_pairs(pairs, out), 3u);
    const std::string text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    std::istringstream in(text);
    EXPECT_EQ(pcpo::parse_pairs(in), pairs);
}

TEST(WritePairs, FieldOrderMatchesSchema) {
    std::ostringstream out;
    pcpo::write_pairs(std::vector{sample_pair(0.375)}, out);
    const auto j = json::parse(out.str());
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"prompt_id", "question", "chosen", "rejected", "s_w",
                                              "matched_token_count", "levenshtein_distance", "levenshtein_rank"}));
}

TEST(WritePairs, ScoreSurvivesTextExactly) {
    // The oracle here is round-trip equality; the decimal form must carry
    // enough digits to get the same double back.
    pcpo::Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        double s = i == 0 ? 0.375 : rng.uniform();
        if (i == 1) s = 1.0 / 3.0;
        auto p = sample_pair(std::min(s, 0.5));
        std::ostringstream out;
        pcpo::write_pairs(std::vector{p}, out);
        std::istringstream in(out.str());
        ASSERT_EQ(pcpo::parse_pairs(in).at(0).s_w, p.s_w) << out.str();
    }
    std::ostringstream out;
    pcpo::write_pairs(std::vector{sample_pair(1.0 / 3.0)}, out);
    EXPECT_NE(out.str().find("0.3333333333333333"), std::string::npos);
}

class FailingBuf : public std::streambuf {
public:
    explicit FailingBuf(std::size_t limit) : limit_(limit) {}
    std::string data;

protected:
    int_type overflow(int_type c) override {
        if (data.size() >= limit_) return traits_type::eof();
        data.push_back(static_cast<char>(c));
        return c;
    }

private:
    std::size_t limit_;
};

TEST(WritePairs, SinkFailureReportsPartialCount) {
    std::vector<pcpo::SelectedPair> pairs{sample_pair(0.375), sample_pair(0.25), sample_pair(0.125)};
    std::ostringstream ref;
    pcpo::write_pairs(std::span(pairs).first(2), ref);
    // Room for two full lines and part of the third.
    FailingBuf buf(ref.str().size() + 10);
    std::ostream out(&buf);
    try {
        pcpo::write_pairs(pairs, out);
        FAIL() << "expected WriteError";
    } catch (const pcpo::WriteError& e) {
        EXPECT_EQ(e.written(), 2u);
    }
}

TEST(Corpus, PairValidation) {
    auto raw = pcpo::to_json(sample_pair(0.375));
    EXPECT_TRUE(pcpo::validate_pair(raw).ok());
    raw["s_w"] = 1.5;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "s_w", "s_w out of range [0, 1]");
    raw["s_w"] = 0.75;  // matched 2 of 4 rejected tokens caps s_w at 0.5
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "s_w", "s_w exceeds matched fraction of rejected tokens");
    raw["s_w"] = 0.5;
    EXPECT_TRUE(pcpo::validate_pair(raw).ok());
    raw["matched_token_count"] = 9;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "matched_token_count", "exceeds sequence length");
    raw["matched_token_count"] = 2;
    raw["levenshtein_rank"] = 0;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "levenshtein_rank", "must be positive");
    raw["levenshtein_rank"] = 1;
    raw["levenshtein_distance"] = -1;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "levenshtein_distance", "must be nonnegative");
    raw["levenshtein_distance"] = 1.5;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "levenshtein_distance", "expected integer");
    raw["levenshtein_distance"] = 2;
    raw["rejected"]["logprobs"][0] = 0.5;
    EXPECT_VIOLATION(pcpo::validate_pair(raw), "rejected.logprobs[0]", "logprob above bound");
}

TEST(CorpusProperty, RandomCorpusRoundTrip) {
    pcpo::Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto corpus = pcpo::testgen::random_corpus(rng, 1 + rng.below(8));
        if (trial % 2 == 0) corpus[0].responses[0].answer = "7";
        std::ostringstream out;
        EXPECT_EQ(pcpo::write_corpus(corpus, out), corpus.size());
        std::istringstream in(out.str());
        ASSERT_EQ(pcpo::parse_corpus(in), corpus);
    }
}

TEST(Token, StableHashDistinguishesKinds) {
    EXPECT_NE(pcpo::stable_hash(pcpo::Token{std::int64_t{1}}), pcpo::stable_hash(pcpo::Token{std::string("1")}));
    // FNV-1a 64 of "s:a", computed by hand from the offset basis and prime.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : std::string("s:a")) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    EXPECT_EQ(pcpo::stable_hash(pcpo::Token{std::string("a")}), h);
}

TEST(Token, InterningIsConsistent) {
    pcpo::TokenTable table;
    const std::vector<pcpo::Token> seq{std::string("x"), std::int64_t{5}, std::string("x"), std::string("5")};
    const auto ids = table.intern(seq);
    EXPECT_EQ(ids[0], ids[2]);
    EXPECT_NE(ids[1], ids[3]);
    EXPECT_EQ(table.size(), 3u);
}

}  // namespace
