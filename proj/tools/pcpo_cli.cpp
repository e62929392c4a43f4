// pcpo: preference-pair curation by token probability consistency.
//
//   pcpo select     --input corpus.jsonl --output pairs.jsonl [--k 8] [--min-s-w 0] [--report r.json] [--jobs N]
//   pcpo stats      --input pairs.jsonl [--output stats.json]
//   pcpo loss-check --input pairs.jsonl [--seed S] [--report check.json]
//   pcpo validate   --input corpus.jsonl [--report violations.json]
//
// Every subcommand also takes --config FILE (key = value lines); flags win.
// Exit codes: 0 ok, 1 loss-check failed, 2 schema, usage or invalid records,
// 3 I/O, 4 internal.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcpo/corpus.hpp"
#include "pcpo/error.hpp"
#include "pcpo/kernels.hpp"
#include "pcpo/pipeline.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Options {
    pcpo::PipelineConfig pipeline;
    std::string config_file;
};

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    std::istringstream in(text);
    in >> value;
    if (!in || !(in >> std::ws).eof()) {
        throw pcpo::SchemaError("config: bad value for '" + key + "': " + text);
    }
    return value;
}

// Fill options the user did not pass on the command line from the config file.
void apply_config(CLI::App& cmd, Options& opts) {
    if (opts.config_file.empty()) {
        return;
    }
    std::ifstream in(opts.config_file);
    if (!in) {
        throw pcpo::IoError("cannot open config '" + opts.config_file + "'");
    }
    auto& p = opts.pipeline;
    for (const auto& [key, value] : pcpo::parse_config(in)) {
        CLI::Option* flag = nullptr;
        try {
            flag = cmd.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            continue;  // key belongs to another subcommand
        }
        if (flag->count() > 0) {
            continue;
        }
        if (key == "input") p.input = value;
        else if (key == "output") p.output = value;
        else if (key == "report") p.report = value;
        else if (key == "k") p.k = parse_value<std::size_t>(key, value);
        else if (key == "min-s-w") p.min_s_w = parse_value<double>(key, value);
        else if (key == "seed") p.seed = parse_value<std::uint64_t>(key, value);
        else if (key == "jobs") p.jobs = parse_value<unsigned>(key, value);
    }
}

void write_json(const json& doc, const std::string& path) {
    if (path.empty()) {
        std::cout << doc.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw pcpo::IoError("cannot open output '" + path + "'");
    }
    out << doc.dump(2) << '\n';
    if (!out.flush()) {
        throw pcpo::IoError("failed to write '" + path + "'");
    }
}

int cmd_select(const Options& opts) {
    const auto run = pcpo::run_select(opts.pipeline);
    const auto& s = run.summary;
    std::cerr << "select: " << s.prompts << " prompts (" << s.all_correct_prompts << " all-correct, "
              << s.all_wrong_prompts << " all-wrong skipped), " << s.rejected_total << " rejected responses, "
              << s.pairs_emitted << " pairs emitted, " << s.rejected_below_threshold
              << " below min-s-w [kernels: " << pcpo::kernels::isa_name(pcpo::kernels::active().isa) << "]\n";
    return pcpo::kExitOk;
}

int cmd_stats(const Options& opts) {
    if (opts.pipeline.input.empty()) {
        throw std::invalid_argument("input path is empty");
    }
    const auto report = pcpo::run_stats(opts.pipeline.input);
    write_json(pcpo::to_json(report), opts.pipeline.output);
    std::cerr << "stats: " << report.total_pairs << " pairs\n";
    return pcpo::kExitOk;
}

int cmd_loss_check(const Options& opts) {
    if (opts.pipeline.input.empty()) {
        throw std::invalid_argument("input path is empty");
    }
    const auto report = pcpo::run_loss_check(opts.pipeline.input, opts.pipeline.seed);
    write_json(pcpo::to_json(report), opts.pipeline.report.value_or(""));
    std::cerr << "loss-check: " << report.pairs_checked << " pairs, max relative gradient error "
              << report.gradient.max_rel_error << ", reduction error " << report.reduction_max_abs_error
              << (report.passed() ? " -> pass\n" : " -> FAIL\n");
    return report.passed() ? pcpo::kExitOk : pcpo::kExitCheckFailed;
}

int cmd_validate(const Options& opts) {
    if (opts.pipeline.input.empty()) {
        throw std::invalid_argument("input path is empty");
    }
    std::ifstream in(opts.pipeline.input);
    if (!in) {
        throw pcpo::IoError("cannot open input '" + opts.pipeline.input + "'");
    }
    const auto lines = pcpo::validate_corpus(in);
    json problems = json::array();
    std::size_t invalid = 0;
    for (const auto& l : lines) {
        if (l.ok()) {
            continue;
        }
        ++invalid;
        json entry = {{"line", l.line}, {"id", l.report.record_id}};
        json violations = json::array();
        if (l.parse_error) {
            violations.push_back({{"field", ""}, {"message", *l.parse_error}});
        }
        for (const auto& v : l.report.violations) {
            violations.push_back({{"field", v.field}, {"message", v.message}});
            std::cerr << "line " << l.line << (l.report.record_id.empty() ? "" : " '" + l.report.record_id + "'")
                      << ": " << v.field << ": " << v.message << '\n';
        }
        if (l.parse_error) {
            std::cerr << "line " << l.line << ": " << *l.parse_error << '\n';
        }
        entry["violations"] = std::move(violations);
        problems.push_back(std::move(entry));
    }
    if (opts.pipeline.report) {
        write_json(json{{"records", lines.size()}, {"invalid", invalid}, {"problems", problems}},
                   *opts.pipeline.report);
    }
    std::cerr << "validate: " << lines.size() << " records, " << invalid << " invalid\n";
    return invalid == 0 ? pcpo::kExitOk : pcpo::kExitSchema;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preference-pair curation by token probability consistency"};
    app.require_subcommand(1);
    Options opts;
    auto& p = opts.pipeline;

    auto* select = app.add_subcommand("select", "Select one preference pair per rejected response");
    select->add_option("--input", p.input, "Prompt corpus (JSON lines)");
    select->add_option("--output", p.output, "Selected pairs (JSON lines)");
    select->add_option("--k", p.k, "Nearest winners kept per loser")->check(CLI::PositiveNumber);
    select->add_option("--min-s-w", p.min_s_w, "Drop selected pairs scoring below this")->check(CLI::Range(0.0, 1.0));
    select->add_option("--report", p.report, "Run summary and rank distribution (JSON)");
    select->add_option("--jobs", p.jobs, "Worker threads (0 = all cores)");

    auto* stats = app.add_subcommand("stats", "Levenshtein-rank distribution of selected pairs");
    stats->add_option("--input", p.input, "Selected pairs (JSON lines)");
    stats->add_option("--output", p.output, "Report path (default stdout)");

    auto* loss = app.add_subcommand("loss-check", "Gradient and reduction checks of the loss on toy models");
    loss->add_option("--input", p.input, "Selected pairs (JSON lines)");
    loss->add_option("--seed", p.seed, "Toy model seed");
    loss->add_option("--report", p.report, "Report path (default stdout)");

    auto* validate = app.add_subcommand("validate", "Report every schema violation in a corpus");
    validate->add_option("--input", p.input, "Prompt corpus (JSON lines)");
    validate->add_option("--report", p.report, "Violations report (JSON)");

    for (auto* cmd : {select, stats, loss, validate}) {
        cmd->add_option("--config", opts.config_file, "key = value defaults; flags override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return pcpo::kExitSchema;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(*cmd, opts);
        if (cmd == select) return cmd_select(opts);
        if (cmd == stats) return cmd_stats(opts);
        if (cmd == loss) return cmd_loss_check(opts);
        return cmd_validate(opts);
    } catch (const pcpo::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return pcpo::kExitSchema;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return pcpo::kExitSchema;
    } catch (const pcpo::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return pcpo::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return pcpo::kExitInternal;
    }
}
