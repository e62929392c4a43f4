#pragma once

// Reference PCPO objective on a table-parameterized bigram model:
//
//   L = -s_w * log sigma(beta * (D(y+) - D(y-)))  -  (alpha * s_w / |y+|) * log M(y+)
//   D(y) = log M(y) - log M_ref(y)
//
// where log M(y) is the sum of per-token log-probabilities (the prompt is the
// BOS conditioning). Gradients are analytic with respect to the policy logits;
// the reference model is frozen.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

namespace pcpo {

/// Autoregressive bigram model: logits(prev, next), row-major V x V.
/// Position 0 is conditioned on the reserved BOS index 0.
class ToyModel {
public:
    static constexpr std::size_t bos = 0;

    /// Uniform model (all logits zero).
    explicit ToyModel(std::size_t vocab_size);
    ToyModel(std::size_t vocab_size, std::vector<double> logits);

    /// Logits drawn uniformly from [-scale, scale].
    static ToyModel random(std::size_t vocab_size, std::uint64_t seed, double scale = 1.0);

    std::size_t vocab_size() const noexcept { return vocab_; }

    std::span<const double> logits() const noexcept { return logits_; }
    std::span<double> logits() noexcept { return logits_; }

    double logit(std::size_t prev, std::size_t next) const { return logits_[prev * vocab_ + next]; }
    double& logit(std::size_t prev, std::size_t next) { return logits_[prev * vocab_ + next]; }

    /// Conditional distribution over the next token after `prev`.
    std::vector<double> softmax_row(std::size_t prev) const;
    double log_normalizer(std::size_t prev) const;

    bool operator==(const ToyModel&) const = default;

private:
    std::size_t vocab_;
    std::vector<double> logits_;
};

/// Gradient table with the same row-major V x V layout as the logits.
using LogitGrad = std::vector<double>;
using TokenSequence = std::vector<std::size_t>;

struct LossConfig {
    double alpha = 1.0;  // NLL coefficient
    double beta = 0.5;   // DPO coefficient
};

struct TrainingPair {
    TokenSequence chosen;
    TokenSequence rejected;
    double s_w = 1.0;
};

/// Numerically stable log(1 / (1 + exp(-x))).
double log_sigmoid(double x);

/// Sum over positions of log softmax(logits[prev])[token]. Throws
/// std::out_of_range for a token outside [0, V) and std::invalid_argument for
/// an empty sequence.
double sequence_logprob(const ToyModel& model, std::span<const std::size_t> tokens);

double pcpo_loss(const ToyModel& policy, const ToyModel& reference,
                 std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                 double s_w, const LossConfig& config);

LogitGrad pcpo_loss_grad(const ToyModel& policy, const ToyModel& reference,
                         std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                         double s_w, const LossConfig& config);

/// Plain DPO: -log sigma(beta * (D(y+) - D(y-))). Uses config.beta only.
double dpo_loss(const ToyModel& policy, const ToyModel& reference,
                std::span<const std::size_t> chosen, std::span<const std::size_t> rejected,
                const LossConfig& config);

/// beta * (log M(y) - log M_ref(y)).
double compute_reward(const ToyModel& policy, const ToyModel& reference,
                      std::span<const std::size_t> tokens, double beta);

/// policy.logits -= learning_rate * grad.
void descent_step(ToyModel& policy, std::span<const double> grad, double learning_rate);

struct GradCheckEntry {
    std::size_t pair = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t entries_checked = 0;
    std::vector<GradCheckEntry> worst;     // largest errors first, at most 8
    std::vector<GradCheckEntry> failures;  // every entry above tolerance
    bool passed = true;
};

/// Floor on the denominator of the relative error, so entries whose true
/// value is zero are judged on an absolute scale.
inline constexpr double kGradCheckFloor = 1e-6;

using GradientFn = std::function<LogitGrad(const ToyModel& policy, const ToyModel& reference,
                                           const TrainingPair& pair, const LossConfig& config)>;

/// Compares an analytic gradient (pcpo_loss_grad unless `gradient` is given)
/// with central differences of pcpo_loss over every policy logit and every
/// pair. rel_error = |a - n| / max(|a|, |n|, kGradCheckFloor).
/// Throws std::invalid_argument unless step > 0 and tolerance > 0.
GradCheckReport grad_check(const ToyModel& policy, const ToyModel& reference,
                           std::span<const TrainingPair> pairs, const LossConfig& config,
                           double step, double tolerance, GradientFn gradient = {});

nlohmann::ordered_json to_json(const ToyModel& model);
ToyModel toy_model_from_json(const nlohmann::ordered_json& raw);

/// One model per line: {"vocab_size": V, "logits": [row-major V*V]}.
void write_models(std::span<const ToyModel> models, std::ostream& out);
std::vector<ToyModel> read_models(std::istream& in);

}  // namespace pcpo
