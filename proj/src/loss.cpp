#include "pcpo/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pcpo/error.hpp"
#include "pcpo/random.hpp"

namespace pcpo {
namespace {

using json = nlohmann::ordered_json;

void require_same_shape(const ToyModel& policy, const ToyModel& reference) {
    if (policy.vocab_size() != reference.vocab_size()) {
        throw std::invalid_argument("policy and reference vocabularies differ");
    }
}

void require_config(double s_w, const LossConfig& config) {
    if (!(s_w >= 0.0 && s_w <= 1.0)) {
        throw std::invalid_argument("s_w must lie in [0, 1]");
    }
    if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) {
        throw std::invalid_argument("alpha must be nonnegative");
    }
    if (!(config.beta > 0.0) || !std::isfinite(config.beta)) {
        throw std::invalid_argument("beta must be positive");
    }
}

double finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::domain_error(std::string("non-finite ") + what);
    }
    return v;
}

// d log M(y) / d logits: visits(prev, next) - visits(prev) * p(next | prev).
LogitGrad logprob_grad(const ToyModel& model, std::span<const std::size_t> tokens) {
    const std::size_t v = model.vocab_size();
    LogitGrad g(v * v, 0.0);
    std::vector<double> row_visits(v, 0.0);
    std::size_t prev = ToyModel::bos;
    for (std::size_t t : tokens) {
        g[prev * v + t] += 1.0;
        row_visits[prev] += 1.0;
        prev = t;
    }
    for (std::size_t r = 0; r < v; ++r) {
        if (row_visits[r] == 0.0) {
            continue;
        }
        const std::vector<double> p = model.softmax_row(r);
        for (std::size_t c = 0; c < v; ++c) {
            g[r * v + c] -= row_visits[r] * p[c];
        }
    }
    return g;
}

struct Margin {
    double policy_chosen;
    double value;  // beta * (D(y+) - D(y-))
};

Margin preference_margin(const ToyModel& policy, const ToyModel& reference,
                         std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                         double beta) {
    require_same_shape(policy, reference);
    const double pc = sequence_logprob(policy, chosen);
    const double delta_chosen = pc - sequence_logprob(reference, chosen);
    const double delta_rejected = sequence_logprob(policy, rejected) - sequence_logprob(reference, rejected);
    return {pc, finite(beta * (delta_chosen - delta_rejected), "preference margin")};
}

}  // namespace

ToyModel::ToyModel(std::size_t vocab_size) : ToyModel(vocab_size, std::vector<double>(vocab_size * vocab_size, 0.0)) {}

ToyModel::ToyModel(std::size_t vocab_size, std::vector<double> logits)
    : vocab_(vocab_size), logits_(std::move(logits)) {
    if (vocab_ == 0) {
        throw std::invalid_argument("vocab_size must be positive");
    }
    if (logits_.size() != vocab_ * vocab_) {
        throw std::invalid_argument("logit table must hold vocab_size^2 entries");
    }
    for (double l : logits_) {
        finite(l, "logit");
    }
}

ToyModel ToyModel::random(std::size_t vocab_size, std::uint64_t seed, double scale) {
    Rng rng(seed);
    std::vector<double> logits(vocab_size * vocab_size);
    for (double& l : logits) {
        l = rng.uniform(-scale, scale);
    }
    return ToyModel(vocab_size, std::move(logits));
}

double ToyModel::log_normalizer(std::size_t prev) const {
    const auto row = logits().subspan(prev * vocab_, vocab_);
    const double peak = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double l : row) {
        sum += std::exp(l - peak);
    }
    return peak + std::log(sum);
}

std::vector<double> ToyModel::softmax_row(std::size_t prev) const {
    const double lse = log_normalizer(prev);
    std::vector<double> p(vocab_);
    for (std::size_t c = 0; c < vocab_; ++c) {
        p[c] = std::exp(logit(prev, c) - lse);
    }
    return p;
}

double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sequence_logprob(const ToyModel& model, std::span<const std::size_t> tokens) {
    if (tokens.empty()) {
        throw std::invalid_argument("sequence_logprob: empty sequence");
    }
    const std::size_t v = model.vocab_size();
    std::vector<double> lse(v, std::numeric_limits<double>::quiet_NaN());
    double total = 0.0;
    std::size_t prev = ToyModel::bos;
    for (std::size_t t : tokens) {
        if (t >= v) {
            throw std::out_of_range("token index " + std::to_string(t) + " outside vocabulary of " +
                                    std::to_string(v));
        }
        if (std::isnan(lse[prev])) {
            lse[prev] = model.log_normalizer(prev);
        }
        total += model.logit(prev, t) - lse[prev];
        prev = t;
    }
    return total;
}

double pcpo_loss(const ToyModel& policy, const ToyModel& reference,
                 std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                 double s_w, const LossConfig& config) {
    require_config(s_w, config);
    const Margin m = preference_margin(policy, reference, chosen, rejected, config.beta);
    const double dpo = -s_w * log_sigmoid(m.value);
    const double nll = -(config.alpha * s_w / static_cast<double>(chosen.size())) * m.policy_chosen;
    return finite(dpo + nll, "loss");
}

LogitGrad pcpo_loss_grad(const ToyModel& policy, const ToyModel& reference,
                         std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                         double s_w, const LossConfig& config) {
    require_config(s_w, config);
    const Margin m = preference_margin(policy, reference, chosen, rejected, config.beta);

    // dL/dmargin = -s_w * sigma(-margin); dmargin/dtheta = beta * (g+ - g-).
    const double dpo_scale = -s_w * std::exp(log_sigmoid(-m.value)) * config.beta;
    const double nll_scale = -config.alpha * s_w / static_cast<double>(chosen.size());

    const LogitGrad g_chosen = logprob_grad(policy, chosen);
    const LogitGrad g_rejected = logprob_grad(policy, rejected);
    LogitGrad grad(g_chosen.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] = finite(dpo_scale * (g_chosen[i] - g_rejected[i]) + nll_scale * g_chosen[i], "gradient");
    }
    return grad;
}

double dpo_loss(const ToyModel& policy, const ToyModel& reference,
                std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                const LossConfig& config) {
    require_config(1.0, config);
    const Margin m = preference_margin(policy, reference, chosen, rejected, config.beta);
    return finite(-log_sigmoid(m.value), "loss");
}

double compute_reward(const ToyModel& policy, const ToyModel& reference,
                      std::span<const std::size_t> tokens, double beta) {
    require_same_shape(policy, reference);
    return beta * (sequence_logprob(policy, tokens) - sequence_logprob(reference, tokens));
}

void descent_step(ToyModel& policy, std::span<const double> grad, double learning_rate) {
    auto logits = policy.logits();
    if (grad.size() != logits.size()) {
        throw std::invalid_argument("gradient shape does not match the model");
    }
    for (std::size_t i = 0; i < logits.size(); ++i) {
        logits[i] -= learning_rate * grad[i];
    }
}

GradCheckReport grad_check(const ToyModel& policy, const ToyModel& reference,
                           std::span<const TrainingPair> pairs, const LossConfig& config,
                           double step, double tolerance, GradientFn gradient) {
    if (!(step > 0.0) || !(tolerance > 0.0)) {
        throw std::invalid_argument("grad_check: step and tolerance must be positive");
    }
    if (!gradient) {
        gradient = [](const ToyModel& p, const ToyModel& r, const TrainingPair& pair, const LossConfig& c) {
            return pcpo_loss_grad(p, r, pair.chosen, pair.rejected, pair.s_w, c);
        };
    }

    GradCheckReport report;
    const std::size_t v = policy.vocab_size();
    ToyModel probe = policy;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const TrainingPair& pair = pairs[k];
        const LogitGrad analytic = gradient(policy, reference, pair, config);
        if (analytic.size() != v * v) {
            throw std::invalid_argument("grad_check: gradient has the wrong shape");
        }
        for (std::size_t i = 0; i < v * v; ++i) {
            const double saved = probe.logits()[i];
            probe.logits()[i] = saved + step;
            const double up = pcpo_loss(probe, reference, pair.chosen, pair.rejected, pair.s_w, config);
            probe.logits()[i] = saved - step;
            const double down = pcpo_loss(probe, reference, pair.chosen, pair.rejected, pair.s_w, config);
            probe.logits()[i] = saved;

            GradCheckEntry e;
            e.pair = k;
            e.row = i / v;
            e.col = i % v;
            e.analytic = analytic[i];
            e.numeric = (up - down) / (2.0 * step);
            const double scale = std::max({std::fabs(e.analytic), std::fabs(e.numeric), kGradCheckFloor});
            e.rel_error = std::fabs(e.analytic - e.numeric) / scale;

            ++report.entries_checked;
            report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
            if (!(e.rel_error <= tolerance)) {
                report.failures.push_back(e);
                report.passed = false;
            }
            report.worst.push_back(e);
            std::sort(report.worst.begin(), report.worst.end(),
                      [](const GradCheckEntry& a, const GradCheckEntry& b) { return a.rel_error > b.rel_error; });
            if (report.worst.size() > 8) {
                report.worst.pop_back();
            }
        }
    }
    return report;
}

json to_json(const ToyModel& model) {
    return {{"vocab_size", model.vocab_size()},
            {"logits", std::vector<double>(model.logits().begin(), model.logits().end())}};
}

ToyModel toy_model_from_json(const json& raw) {
    try {
        return ToyModel(raw.at("vocab_size").get<std::size_t>(), raw.at("logits").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw SchemaError(std::string("toy model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("toy model: ") + e.what());
    }
}

void write_models(std::span<const ToyModel> models, std::ostream& out) {
    for (const ToyModel& m : models) {
        out << to_json(m).dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw IoError("failed to write toy models");
    }
}

std::vector<ToyModel> read_models(std::istream& in) {
    std::vector<ToyModel> models;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            models.push_back(toy_model_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return models;
}

}  // namespace pcpo
