#pragma once

#include <cstdint>
#include <vector>

#include "asgm/dynamics.hpp"
#include "asgm/field.hpp"
#include "asgm/integrator.hpp"
#include "asgm/score_net.hpp"

namespace asgm {

enum class Optimizer { Adam, Sgd };

struct TrainerConfig {
    long iterations = 2000;
    int batch_size = 8;
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-3;
    double final_lr_fraction = 0.1;  // linear decay toward this fraction
    double weight_decay = 0.0;       // decoupled L2 shrinkage per step
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double t_min_fraction = 1e-3;  // lower time truncation, as a fraction of T
    std::uint64_t seed = 0;
    int threads = 0;
    StepperConfig flow{1e-2, 1.0, 0};  // drift-only flows for quasilinear targets
};

struct TrainResult {
    std::vector<double> loss_history;  // one weighted batch-mean entry per iteration
};

/// Minimize E_{t ~ U(t_min, T)} weight(t) |model(t, x_t) - target|^2 / npix
/// over the dataset by Adam. Batch gradients are accumulated in index order
/// (deterministic for any thread count). Throws TrainingDivergedError when
/// the loss becomes non-finite.
TrainResult train_dsm(TrainableModel& model, const std::vector<Field>& dataset,
                      const SpdeInstance& instance, const TrainerConfig& cfg);

}  // namespace asgm
