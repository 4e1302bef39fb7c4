#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>

#include "asgm/field.hpp"
#include "asgm/score.hpp"

namespace asgm {

/// Sinusoidal time features at geometric frequencies: for each of
/// n_frequencies values w between min_freq and max_freq, emits sin(w t) and
/// cos(w t).
struct TimeEmbedding {
    int n_frequencies = 8;
    double min_freq = 1.0;
    double max_freq = 1000.0;

    int dim() const { return 2 * n_frequencies; }
    double frequency(int f) const;
    void features(double t, double* out) const;
};

/// Anything the DSM trainer can optimize: a flat parameter vector plus a
/// per-example weighted-MSE loss with its reverse-mode gradient.
class TrainableModel {
public:
    virtual ~TrainableModel() = default;
    virtual int channels() const = 0;
    virtual int height() const = 0;
    virtual int width() const = 0;
    virtual int field_dim() const = 0;
    virtual Eigen::VectorXd& parameters() = 0;
    virtual const Eigen::VectorXd& parameters() const = 0;
    long parameter_count() const { return parameters().size(); }

    /// loss = weight * |model(x, t) - target|^2 / field_dim; adds the
    /// parameter gradient into grad (same length as parameters()).
    virtual double example_loss_and_grad(const Eigen::VectorXd& x, double t,
                                         const Eigen::VectorXd& target, double weight,
                                         Eigen::VectorXd& grad) const = 0;

    virtual Field score(double t, const Field& x) const = 0;
};

/// Two-hidden-layer tanh network mapping (field, time features) to a score
/// field of the same size. Parameters live in one flat vector; gradients
/// come from hand-written reverse-mode differentiation of the affine/tanh
/// stack. The output layer starts at zero so an untrained model scores 0.
class ScoreNetwork : public TrainableModel {
public:
    ScoreNetwork(int channels, int height, int width, int hidden_width, TimeEmbedding embedding,
                 std::uint64_t init_seed);

    int field_dim() const override { return field_dim_; }
    int hidden_width() const { return hidden_width_; }
    int channels() const override { return channels_; }
    int height() const override { return height_; }
    int width() const override { return width_; }
    const TimeEmbedding& embedding() const { return embedding_; }

    Eigen::VectorXd& parameters() override { return params_; }
    const Eigen::VectorXd& parameters() const override { return params_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x, double t) const;
    Field score(double t, const Field& x) const override;

    double example_loss_and_grad(const Eigen::VectorXd& x, double t,
                                 const Eigen::VectorXd& target, double weight,
                                 Eigen::VectorXd& grad) const override;

    /// Checkpoint: one tensor snapshot per parameter block plus a manifest.
    void save_checkpoint(const std::filesystem::path& dir, const std::string& config_echo) const;
    static ScoreNetwork load_checkpoint(const std::filesystem::path& dir);

private:
    struct Views;
    Views views() const;
    Views views_of(Eigen::VectorXd& storage) const;

    int channels_;
    int height_;
    int width_;
    int field_dim_;
    int input_dim_;
    int hidden_width_;
    TimeEmbedding embedding_;
    Eigen::VectorXd params_;
};

/// Score linear in the state with time-modulated coefficients:
///   s(t, x) = (P + sum_f e_f(t) Q_f) x + b + B e(t).
/// The exact form of a Gaussian-marginal score; suited to desk-scale
/// problems (the gain matrices are field_dim^2 per feature). Starts at zero.
class LinearScoreModel : public TrainableModel {
public:
    LinearScoreModel(int channels, int height, int width, TimeEmbedding embedding);

    int field_dim() const override { return field_dim_; }
    int channels() const override { return channels_; }
    int height() const override { return height_; }
    int width() const override { return width_; }
    const TimeEmbedding& embedding() const { return embedding_; }

    Eigen::VectorXd& parameters() override { return params_; }
    const Eigen::VectorXd& parameters() const override { return params_; }

    Eigen::VectorXd forward(const Eigen::VectorXd& x, double t) const;
    Field score(double t, const Field& x) const override;

    double example_loss_and_grad(const Eigen::VectorXd& x, double t,
                                 const Eigen::VectorXd& target, double weight,
                                 Eigen::VectorXd& grad) const override;

private:
    int channels_;
    int height_;
    int width_;
    int field_dim_;
    TimeEmbedding embedding_;
    Eigen::VectorXd params_;
};

/// ScoreModel adapter for a trained network.
class LearnedScore : public ScoreModel {
public:
    explicit LearnedScore(ScoreNetwork net) : net_(std::move(net)) {}
    Field score(double t, const Field& x) const override { return net_.score(t, x); }
    const ScoreNetwork& network() const { return net_; }

private:
    ScoreNetwork net_;
};

}  // namespace asgm
