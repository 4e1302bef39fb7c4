#include "asgm/train.hpp"

#include <cmath>

#include "asgm/errors.hpp"
#include "asgm/parallel.hpp"
#include "asgm/score.hpp"

namespace asgm {

TrainResult train_dsm(TrainableModel& model, const std::vector<Field>& dataset,
                      const SpdeInstance& instance, const TrainerConfig& cfg) {
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    for (const Field& f : dataset) {
        if (f.channels() != model.channels() || f.height() != model.height() ||
            f.width() != model.width()) {
            throw ShapeMismatchError("dataset image shape does not match the model");
        }
    }
    if (cfg.batch_size < 1) throw ConfigError("batch size must be positive");

    DsmTargetSampler sampler(instance, cfg.flow);
    const double T = instance.terminal_time();
    const double t_min = cfg.t_min_fraction * T;
    const long P = model.parameter_count();
    const int B = cfg.batch_size;

    TrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(std::max<long>(cfg.iterations, 0)));

    Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(P);
    std::vector<Eigen::VectorXd> grads(B, Eigen::VectorXd::Zero(P));
    std::vector<double> losses(B, 0.0);

    for (long iter = 0; iter < cfg.iterations; ++iter) {
        parallel_for(B, cfg.threads, [&](long b) {
            // one stream per (iteration, batch slot): identical work for any
            // thread count
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(iter) * B + b + 1);
            std::size_t idx = rng.next_u64() % dataset.size();
            double t = t_min + (T - t_min) * rng.uniform();
            auto [plus, minus] = sampler.sample_antithetic(dataset[idx], t, rng);
            grads[b].setZero();
            double loss = 0.0;
            for (const DsmBatchTarget* target : {&plus, &minus}) {
                Eigen::Map<const Eigen::VectorXd> xv(target->x_t.values().data(),
                                                     model.field_dim());
                Eigen::Map<const Eigen::VectorXd> sv(target->target_score.values().data(),
                                                     model.field_dim());
                // half-weight per leg: loss and gradient are the pair average
                loss += model.example_loss_and_grad(xv, t, sv, 0.5 * target->weight, grads[b]);
            }
            losses[b] = loss;
        });

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
        double loss = 0.0;
        for (int b = 0; b < B; ++b) {
            grad += grads[b];
            loss += losses[b];
        }
        grad /= B;
        loss /= B;
        if (!std::isfinite(loss)) throw TrainingDivergedError(iter);
        result.loss_history.push_back(loss);

        double progress = cfg.iterations > 1
                              ? static_cast<double>(iter) / static_cast<double>(cfg.iterations - 1)
                              : 0.0;
        double step = cfg.learning_rate *
                      (cfg.final_lr_fraction + (1.0 - cfg.final_lr_fraction) * (1.0 - progress));
        if (cfg.optimizer == Optimizer::Adam) {
            adam_m = cfg.beta1 * adam_m + (1.0 - cfg.beta1) * grad;
            adam_v = cfg.beta2 * adam_v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
            double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(iter + 1));
            double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(iter + 1));
            Eigen::ArrayXd m_hat = adam_m.array() / c1;
            Eigen::ArrayXd v_hat = adam_v.array() / c2;
            model.parameters().array() -= step * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
        } else {
            model.parameters() -= step * grad;
        }
        if (cfg.weight_decay > 0.0) {
            model.parameters() *= 1.0 - step * cfg.weight_decay;
        }
        if (!model.parameters().allFinite()) throw TrainingDivergedError(iter);
    }
    return result;
}

}  // namespace asgm
