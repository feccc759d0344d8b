#include "graf/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace graf {

LossKind parse_loss_kind(std::string_view s) {
    if (s == "bce") return LossKind::bce;
    if (s == "cosine") return LossKind::cosine;
    throw std::invalid_argument("unknown loss '" + std::string(s) + "' (expected bce or cosine)");
}

std::string_view to_string(LossKind k) noexcept { return k == LossKind::bce ? "bce" : "cosine"; }

LossValue bce_loss(int target, double y) {
    if (target != 0 && target != 1) throw std::invalid_argument("bce_loss: target must be 0 or 1");
    if (!(y > 0.0 && y < 1.0)) throw std::domain_error("bce_loss: probability must lie strictly inside (0, 1)");
    const double o = target;
    return {-(o * std::log(y) + (1.0 - o) * std::log1p(-y)), (y - o) / (y * (1.0 - y))};
}

LossValue cosine_embedding_loss(int target, double y) {
    if (target != -1 && target != 1) throw std::invalid_argument("cosine_embedding_loss: target must be -1 or +1");
    const double o = target;
    return {(1.0 + o) * (1.0 - y) + (1.0 - o) * y, -(1.0 + o) + (1.0 - o)};
}

AdamW::AdamW(std::size_t n, AdamWConfig config) : config_(config), m_(n, 0.0), v_(n, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) throw std::invalid_argument("AdamW: size mismatch");
    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
    }
    const double lr = config_.learning_rate;
    if (lr == 0.0) return;
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= lr * config_.weight_decay * params[i];
        const double mhat = m_[i] / bias1;
        const double vhat = v_[i] / bias2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
}

double choice_loss(const PreparedChoice& in, const Model& model, bool is_target, LossKind kind, Model* grad) {
    const ScoreTrace tr = score_forward(in, model);
    if (kind == LossKind::bce) {
        // softplus form of the same loss, finite when the sigmoid saturates
        const double o = is_target ? 1.0 : 0.0;
        const double z = tr.logit;
        const double value = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - o * z;
        if (grad != nullptr) score_backward(in, model, tr, tr.probability - o, {}, *grad);
        return value;
    }
    const auto& w = model.scorer.w_final;
    const double y = cosine(tr.fused, w);
    const LossValue l = cosine_embedding_loss(is_target ? 1 : -1, y);
    if (grad != nullptr) {
        const double nc = std::sqrt(norm2(tr.fused));
        const double nw = std::sqrt(norm2(w));
        if (nc > 0.0 && nw > 0.0) {
            // dy/dc = w/(|c||w|) - y c/|c|^2 and symmetrically for w
            Vector d_fused(w.size(), 0.0);
            kernels::axpy(l.grad / (nc * nw), w, d_fused);
            kernels::axpy(-l.grad * y / (nc * nc), tr.fused, d_fused);
            kernels::axpy(l.grad / (nc * nw), tr.fused, grad->scorer.w_final);
            kernels::axpy(-l.grad * y / (nw * nw), w, grad->scorer.w_final);
            score_backward(in, model, tr, 0.0, d_fused, *grad);
        }
    }
    return l.value;
}

GradCheckResult grad_check(const LossWithGradient& f, std::span<const double> theta, std::size_t n_coords, double eps,
                           std::uint64_t seed) {
    if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
    Vector point(theta.begin(), theta.end());
    Vector analytic(theta.size(), 0.0);
    f(point, analytic);

    std::vector<std::size_t> coords(theta.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (n_coords < coords.size()) {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < n_coords; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (coords.size() - i));
            std::swap(coords[i], coords[j]);
        }
        coords.resize(n_coords);
    }

    GradCheckResult result;
    for (std::size_t idx : coords) {
        const double saved = point[idx];
        point[idx] = saved + eps;
        const double up = f(point, {});
        point[idx] = saved - eps;
        const double down = f(point, {});
        point[idx] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double a = analytic[idx];
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        ++result.checked;
        if (err > result.max_relative_error || result.checked == 1) {
            result.max_relative_error = err;
            result.worst_index = idx;
            result.worst_analytic = a;
            result.worst_numeric = numeric;
        }
    }
    return result;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be positive");
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (dim < 1 || heads < 1) throw std::invalid_argument("dim and heads must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("betas must lie in [0, 1)");
    if (!(adam_eps > 0.0) || weight_decay < 0.0) throw std::invalid_argument("bad optimizer eps or weight decay");
}

std::vector<PreparedItem> prepare_items(const std::vector<MCQAItem>& items, const Pipeline& pipeline) {
    std::vector<PreparedItem> out;
    out.reserve(items.size());
    for (const auto& item : items) {
        PreparedItem p;
        p.item = &item;
        for (const auto& c : item.choices) p.choices.push_back(pipeline.prepare(item, c.label));
        out.push_back(std::move(p));
    }
    return out;
}

std::map<Label, double> score_item(const PreparedItem& item, const Model& model) {
    std::map<Label, double> scores;
    for (const auto& c : item.choices) scores[c.label] = score_forward(c, model).probability;
    return scores;
}

double prepared_accuracy(std::span<const PreparedItem> items, const Model& model) {
    if (items.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t correct = 0;
    for (const auto& it : items) {
        if (select_answers(score_item(it, model), it.item->targets.size()) == it.item->targets) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(items.size());
}

TrainResult train(const std::vector<MCQAItem>& train_items, const std::vector<MCQAItem>& validation_items,
                  const Pipeline& pipeline, const TrainConfig& config, const TrainCallbacks& callbacks) {
    if (train_items.empty()) throw std::invalid_argument("train: empty training set");
    if (pipeline.encoder().dim() != config.dim) {
        throw std::invalid_argument("train: encoder dimension differs from the configured model dimension");
    }
    const auto train_prep = prepare_items(train_items, pipeline);
    const auto val_prep = prepare_items(validation_items, pipeline);
    return train_prepared(train_prep, val_prep, config, callbacks);
}

TrainResult train_prepared(std::span<const PreparedItem> train_items, std::span<const PreparedItem> validation_items,
                           const TrainConfig& config, const TrainCallbacks& callbacks) {
    config.validate();
    if (train_items.empty()) throw std::invalid_argument("train: empty training set");

    TrainResult result;
    Model model = Model::random(config.dim, config.heads, config.seed, config.leaky_slope);
    AdamW opt(model.parameter_count(), {config.learning_rate, config.beta1, config.beta2, config.adam_eps,
                                        config.weight_decay});
    std::mt19937_64 order_rng(config.seed ^ 0x5f3759dfULL);
    std::vector<std::size_t> order(train_items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double best_metric = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    result.best = model;
    Model grad = Model::zeros(config.dim, config.heads, config.leaky_slope);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng() % i]);
        EpochLog log;
        log.epoch = epoch;
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const PreparedItem& it = train_items[idx];
            for (auto t : grad.tensors()) std::fill(t.begin(), t.end(), 0.0);
            double item_loss = 0.0;
            for (const auto& c : it.choices) {
                const double l = choice_loss(c, model, it.item->is_target(c.label), config.loss, &grad);
                ++log.loss_evaluations;
                if (!std::isfinite(l)) {
                    std::ostringstream msg;
                    msg << "non-finite loss at epoch " << epoch << ", item " << it.item->id << ", choice " << c.label;
                    throw TrainingError(msg.str());
                }
                item_loss += l;
            }
            loss_sum += item_loss;
            Vector flat = model.flatten();
            Vector g = grad.flatten();
            const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, it.choices.size()));
            for (double& x : g) x *= inv;
            opt.step(flat, g);
            model.assign(flat);
        }
        log.mean_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, log.loss_evaluations));
        log.train_accuracy = prepared_accuracy(train_items, model);
        if (!validation_items.empty()) log.validation_accuracy = prepared_accuracy(validation_items, model);
        result.log.push_back(log);

        const double metric = validation_items.empty() ? log.train_accuracy : log.validation_accuracy;
        if (metric > best_metric || (metric == best_metric && log.mean_loss < best_loss)) {
            best_metric = metric;
            best_loss = log.mean_loss;
            result.best = model;
            result.best_epoch = epoch;
        }
        if (callbacks.on_epoch) callbacks.on_epoch(log);
        if (callbacks.on_checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0) {
            callbacks.on_checkpoint(epoch, model);
        }
        if (!std::isnan(config.stop_at_train_accuracy) && log.train_accuracy >= config.stop_at_train_accuracy) break;
    }
    result.last = std::move(model);
    return result;
}

}  // namespace graf
