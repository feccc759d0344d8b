#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "graf/scorer.hpp"

namespace graf {

enum class LossKind { bce, cosine };

LossKind parse_loss_kind(std::string_view s);
std::string_view to_string(LossKind k) noexcept;

struct LossValue {
    double value;
    double grad;   // dL/dy
};

/// -(o ln y + (1 - o) ln(1 - y)) for o in {0, 1}; y must lie in (0, 1).
LossValue bce_loss(int target, double y);

/// (1 + o)(1 - y) + (1 - o) y for o in {-1, +1}. Taken as written: it is
/// negative for o = -1 and y < 0.
LossValue cosine_embedding_loss(int target, double y);

struct AdamWConfig {
    double learning_rate = 1e-7;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// Decoupled weight decay Adam over a flat parameter vector.
class AdamW {
public:
    AdamW(std::size_t n, AdamWConfig config);
    void step(std::span<double> params, std::span<const double> grads);
    std::size_t steps() const noexcept { return t_; }

private:
    AdamWConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

/// Loss of one prepared choice against its 0/1 target. With bce the loss
/// is applied to the sigmoid score; with cosine, y = cos(c_final, w_final)
/// and the target is mapped to -1/+1. Adds gradients into `grad` if given.
double choice_loss(const PreparedChoice& in, const Model& model, bool is_target, LossKind kind, Model* grad = nullptr);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
};

/// f(theta) returning the loss and, when `grad` is non-null, writing the
/// analytic gradient (same length as theta) into it.
using LossWithGradient = std::function<double(std::span<const double> theta, std::span<double> grad)>;

/// Central differences (f(t + eps) - f(t - eps)) / (2 eps) on n_coords
/// coordinates drawn without replacement (all of them if n_coords >= size).
/// relative error = |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const LossWithGradient& f, std::span<const double> theta, std::size_t n_coords, double eps,
                           std::uint64_t seed = 0);

struct TrainConfig {
    double learning_rate = 1e-7;
    std::size_t epochs = 50;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::bce;
    std::size_t dim = 64;
    std::size_t heads = 6;
    double leaky_slope = 0.2;
    /// Call on_checkpoint every N epochs (0 disables).
    std::size_t checkpoint_every = 0;
    /// Stop once training accuracy reaches this value (NaN disables).
    double stop_at_train_accuracy = std::numeric_limits<double>::quiet_NaN();

    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;   // 1-based
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = std::numeric_limits<double>::quiet_NaN();
    std::size_t loss_evaluations = 0;
};

struct TrainResult {
    Model best;
    Model last;
    std::size_t best_epoch = 0;
    std::vector<EpochLog> log;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PreparedItem {
    const MCQAItem* item = nullptr;
    std::vector<PreparedChoice> choices;
};

std::vector<PreparedItem> prepare_items(const std::vector<MCQAItem>& items, const Pipeline& pipeline);

/// Per-label probabilities for a prepared item.
std::map<Label, double> score_item(const PreparedItem& item, const Model& model);

/// Exact-match accuracy with the gold answer count as cardinality.
double prepared_accuracy(std::span<const PreparedItem> items, const Model& model);

struct TrainCallbacks {
    std::function<void(const EpochLog&)> on_epoch;
    std::function<void(std::size_t epoch, const Model&)> on_checkpoint;
};

/// One AdamW step per item on the mean loss over its choices; items are
/// visited in a seeded shuffle each epoch. The returned `best` model is the
/// epoch with the highest validation accuracy (training accuracy when no
/// validation items are given), ties going to the lower mean loss.
TrainResult train(const std::vector<MCQAItem>& train_items, const std::vector<MCQAItem>& validation_items,
                  const Pipeline& pipeline, const TrainConfig& config, const TrainCallbacks& callbacks = {});

TrainResult train_prepared(std::span<const PreparedItem> train_items, std::span<const PreparedItem> validation_items,
                           const TrainConfig& config, const TrainCallbacks& callbacks = {});

}  // namespace graf
