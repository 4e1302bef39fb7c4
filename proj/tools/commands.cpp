#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asgm/errors.hpp"
#include "asgm/evaluation.hpp"
#include "asgm/image_io.hpp"
#include "asgm/log.hpp"
#include "asgm/reversal.hpp"
#include "asgm/shapes.hpp"
#include "asgm/snapshot.hpp"
#include "asgm/train.hpp"
#include "asgm/version.hpp"

namespace fs = std::filesystem;

namespace asgm::cli {

namespace {

fs::path require_out_dir(const RunConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("out.dir (or --out) is required");
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& config,
                    const std::string& extra = "") {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << "version=" << kVersion << "\n";
    out << "command=" << command << "\n";
    out << config.echo();
    if (!extra.empty()) out << extra;
}

std::vector<Field> load_image_dir(const std::string& dir_str) {
    fs::path dir(dir_str);
    if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Field> images;
    images.reserve(paths.size());
    for (const auto& p : paths) images.push_back(read_image(p));
    for (const Field& f : images) {
        if (!f.same_shape(images.front())) {
            throw ConfigError("dataset images must share one shape (" + dir.string() + ")");
        }
    }
    return images;
}

std::vector<Field> load_dataset(const RunConfig& config) {
    if (config.synthetic == "shapes") {
        return make_shapes_corpus(config.data_count, config.data_channels, config.data_size,
                                  config.data_size, config.seed);
    }
    if (config.synthetic == "checkerboard") {
        return {checkerboard_with_disk(config.data_size, config.data_size)};
    }
    if (!config.synthetic.empty()) {
        throw ConfigError("unknown synthetic dataset '" + config.synthetic + "'");
    }
    if (config.data_dir.empty()) {
        throw ConfigError("data.dir or data.synthetic is required");
    }
    auto images = load_image_dir(config.data_dir);
    if (images.empty()) throw ConfigError("dataset directory holds no .pgm/.ppm images");
    return images;
}

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

// Prior parameters on disk: mean + per-mode variances + manifest.
void save_prior(const fs::path& dir, const GaussianLaw& law, const std::string& method) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create prior directory " + dir.string());
    save_snapshot(law.mean, dir / "mean.tsnap");
    Field variances(1, 1, static_cast<int>(law.mode_variances.size()));
    for (std::size_t k = 0; k < law.mode_variances.size(); ++k) {
        variances.values()[k] = law.mode_variances[k];
    }
    save_snapshot(variances, dir / "variances.tsnap");
    std::ofstream manifest(dir / "prior.txt");
    if (!manifest) throw IoError("cannot write prior manifest");
    manifest << "version=" << kVersion << "\n";
    manifest << "method=" << method << "\n";
    manifest << "basis=" << (law.op ? "spectral" : "white") << "\n";
    manifest << "modes=" << law.mode_variances.size() << "\n";
}

GaussianLaw load_prior(const fs::path& dir) {
    std::ifstream manifest(dir / "prior.txt");
    if (!manifest) throw IoError("cannot open prior manifest in " + dir.string());
    std::string line, basis;
    while (std::getline(manifest, line)) {
        if (line.rfind("basis=", 0) == 0) basis = line.substr(6);
    }
    GaussianLaw law;
    law.mean = load_snapshot(dir / "mean.tsnap");
    Field variances = load_snapshot(dir / "variances.tsnap");
    law.mode_variances.assign(variances.values().begin(), variances.values().end());
    if (basis == "spectral") {
        law.op = SpectralOperator::shared(law.mean.height(), law.mean.width());
    } else if (basis != "white") {
        throw FormatError("prior manifest has unknown basis '" + basis + "'");
    }
    return law;
}

struct ScoreSetup {
    std::shared_ptr<SpdeInstance> instance;
    std::shared_ptr<const ScoreModel> score;
    GaussianLaw prior;
    int channels = 1, height = 0, width = 0;
};

// Assemble instance + score + prior for sample/sdedit.
ScoreSetup make_score_setup(const RunConfig& config) {
    ScoreSetup setup;
    if (config.score_source == "checkpoint") {
        if (config.checkpoint.empty()) throw ConfigError("checkpoint=DIR is required");
        ScoreNetwork net = ScoreNetwork::load_checkpoint(config.checkpoint);
        setup.channels = net.channels();
        setup.height = net.height();
        setup.width = net.width();
        setup.instance = std::make_shared<SpdeInstance>(
            config.make_schedule(std::max(setup.height, setup.width)));
        setup.score = std::make_shared<LearnedScore>(std::move(net));
        if (!config.prior_file.empty()) {
            setup.prior = load_prior(config.prior_file);
        } else if (classify(setup.instance->schedule()) == SdeClass::LinearAdditive &&
                   !config.calibration_dir.empty()) {
            auto calib = load_image_dir(config.calibration_dir);
            setup.prior = prior_law(*setup.instance, setup.channels, setup.height, setup.width,
                                    calib);
        } else {
            throw ConfigError(
                "a prior is required: prior.file=DIR (from calibrate-prior), or "
                "calibration.dir for linear instances");
        }
        return setup;
    }

    // analytic score: Gaussian-data law around the calibration set
    std::string dir = !config.calibration_dir.empty() ? config.calibration_dir : config.data_dir;
    std::vector<Field> calib;
    if (!dir.empty() || !config.synthetic.empty()) {
        RunConfig data_cfg = config;
        data_cfg.data_dir = dir;
        calib = load_dataset(data_cfg);
    }
    if (calib.size() < 2) {
        throw ConfigError("analytic scores need at least two calibration images "
                          "(calibration.dir or data.dir/data.synthetic)");
    }
    setup.channels = calib.front().channels();
    setup.height = calib.front().height();
    setup.width = calib.front().width();
    setup.instance = std::make_shared<SpdeInstance>(
        config.make_schedule(std::max(setup.height, setup.width)));

    Field mean(setup.channels, setup.height, setup.width, 0.0);
    for (const Field& f : calib) {
        auto mv = mean.values();
        auto fv = f.values();
        for (std::size_t k = 0; k < mv.size(); ++k) mv[k] += fv[k];
    }
    for (double& v : mean.values()) v /= static_cast<double>(calib.size());
    double var0 = 0.0;
    for (const Field& f : calib) {
        auto mv = mean.values();
        auto fv = f.values();
        for (std::size_t k = 0; k < mv.size(); ++k) {
            double d = fv[k] - mv[k];
            var0 += d * d;
        }
    }
    var0 /= static_cast<double>(calib.size() - 1) * static_cast<double>(mean.size());
    if (!(var0 > 0.0)) throw ConfigError("calibration images are identical; no data variance");

    auto analytic = std::make_shared<AnalyticGaussianScore>(*setup.instance, mean, var0);
    setup.prior = analytic->law_at(setup.instance->terminal_time());
    setup.score = analytic;
    return setup;
}

void write_metrics_csv(const fs::path& path, const std::vector<Field>& generated,
                       const std::vector<Field>& reference, std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics CSV " + path.string());
    out << "metric,value,n,seed\n";
    out.precision(12);
    MomentReport gen = moments(generated, 8);
    out << "mean_abs,"
        << gen.mean.max_abs() << "," << generated.size() << "," << seed << "\n";
    for (std::size_t k = 0; k < gen.covariance_spectrum.size(); ++k) {
        out << "cov_eig_gen_" << k << "," << gen.covariance_spectrum[k] << ","
            << generated.size() << "," << seed << "\n";
    }
    if (reference.size() >= 2 && generated.size() >= 2) {
        MomentReport ref = moments(reference, 8);
        for (std::size_t k = 0; k < ref.covariance_spectrum.size(); ++k) {
            out << "cov_eig_ref_" << k << "," << ref.covariance_spectrum[k] << ","
                << reference.size() << "," << seed << "\n";
        }
        out << "mmd2," << mmd_rbf(generated, reference) << "," << generated.size() << "," << seed
            << "\n";
    }
}

}  // namespace

void cmd_forward(const RunConfig& config) {
    fs::path out_dir = require_out_dir(config);
    if (config.image.empty()) throw ConfigError("forward needs image=PATH");
    Field x0 = read_image(config.image);
    const int size = std::max(x0.height(), x0.width());
    const double T = config.terminal_time;

    // Rows reuse the configured intensity schedules and only toggle which
    // destruction channel is active and how anisotropic it is.
    Schedule base = config.make_schedule(size);
    Transition phi1 = base.phi1;
    Transition phi2 = base.phi2;
    Transition aniso1 = base.lambda1.is_infinite() ? Transition::constant(0.025) : base.lambda1;
    Transition aniso2 = base.lambda2.is_infinite() ? Transition::constant(0.025) : base.lambda2;
    Transition blow1 = aniso1.kind() == Transition::Kind::ExponentialBlowup
                           ? aniso1
                           : Transition::exponential_blowup(aniso1.v_min(), 0.5);
    Transition blow2 = aniso2.kind() == Transition::Kind::ExponentialBlowup
                           ? aniso2
                           : Transition::exponential_blowup(aniso2.v_min(), 0.5);
    auto zero = Transition::constant(0.0);
    auto inf = Transition::infinite();

    struct Row {
        const char* label;
        Schedule schedule;
    };
    auto make = [&](Transition p1, Transition l1, Transition p2, Transition l2) {
        Schedule s;
        s.phi1 = p1;
        s.lambda1 = l1;
        s.phi2 = p2;
        s.lambda2 = l2;
        s.terminal_time = T;
        return s;
    };
    std::vector<Row> rows = {
        {"isotropic noise, no drift", make(zero, inf, phi2, inf)},
        {"anisotropic noise, no drift", make(zero, inf, phi2, aniso2)},
        {"isotropic drift, no noise", make(phi1, inf, zero, inf)},
        {"anisotropic drift, no noise", make(phi1, aniso1, zero, inf)},
        {"anisotropic drift + anisotropic noise", make(phi1, aniso1, phi2, aniso2)},
        {"anisotropic noise, transition to isotropy", make(zero, inf, phi2, blow2)},
        {"anisotropic drift, transition to isotropy", make(phi1, blow1, zero, inf)},
        {"anisotropic drift + noise, transition to isotropy", make(phi1, blow1, phi2, blow2)},
    };

    long steps = std::lround(T / config.dt);
    if (steps < 4 || steps % 4 != 0) {
        throw ConfigError("forward montage needs T/dt divisible by 4");
    }
    StepperConfig cfg{config.dt, config.gamma, static_cast<int>(steps / 4)};

    std::vector<Field> tiles;
    std::vector<std::string> labels;
    std::ofstream traj_index(out_dir / "trajectory_index.txt");
    if (!traj_index) throw IoError("cannot write trajectory index");
    traj_index << "# time  filename  seed  stream\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        SpdeInstance instance(rows[r].schedule);
        RngStream rng(config.seed, static_cast<std::uint64_t>(r));
        try {
            Trajectory traj = simulate_forward(instance, x0, cfg, rng);
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                std::string name = "traj_row" + std::to_string(r) + "_s" +
                                   zero_pad(static_cast<int>(k), 2) + ".tsnap";
                save_snapshot(traj.states[k], out_dir / name);
                traj_index << traj.times[k] << "  " << name << "  " << traj.seed << "  "
                           << traj.stream_id << "\n";
                tiles.push_back(traj.states[k]);
            }
            labels.push_back(rows[r].label);
        } catch (const DivergenceError& e) {
            log_error(std::string("row '") + rows[r].label + "' diverged: " + e.what());
            throw;
        }
    }
    bool color = x0.channels() == 3;
    montage(tiles, 5, out_dir / (color ? "montage.ppm" : "montage.pgm"), labels,
            out_dir / "montage_index.txt");
    write_manifest(out_dir, "forward", config);
}

void cmd_train(const RunConfig& config) {
    fs::path out_dir = require_out_dir(config);
    std::vector<Field> dataset = load_dataset(config);
    const Field& probe = dataset.front();
    SpdeInstance instance(config.make_schedule(std::max(probe.height(), probe.width())));

    TimeEmbedding embedding;
    ScoreNetwork net(probe.channels(), probe.height(), probe.width(), config.train_width,
                     embedding, config.seed);
    TrainerConfig trainer;
    trainer.iterations = config.train_iterations;
    trainer.batch_size = config.train_batch;
    trainer.learning_rate = config.train_lr;
    trainer.seed = config.seed;
    trainer.threads = config.threads;
    trainer.flow = StepperConfig{config.dt, config.gamma, 0};
    TrainResult result = train_dsm(net, dataset, instance, trainer);

    net.save_checkpoint(out_dir / "checkpoint", config.echo());
    std::ofstream loss(out_dir / "loss.csv");
    if (!loss) throw IoError("cannot write loss.csv");
    loss << "iteration,loss\n";
    loss.precision(12);
    for (std::size_t k = 0; k < result.loss_history.size(); ++k) {
        loss << k << "," << result.loss_history[k] << "\n";
    }
    write_manifest(out_dir, "train", config,
                   "dataset_size=" + std::to_string(dataset.size()) + "\n");
}

void cmd_sample(const RunConfig& config) {
    fs::path out_dir = require_out_dir(config);
    ScoreSetup setup = make_score_setup(config);
    BackwardInstance bi{setup.instance, setup.score,
                        StepperConfig{config.dt, config.gamma, 0}};
    CorrectorConfig cc{config.corrector_steps, config.corrector_snr};
    std::vector<Field> generated =
        sample(bi, setup.prior, config.n_samples, config.seed, 0, cc, config.threads);

    bool color = setup.channels == 3;
    for (std::size_t k = 0; k < generated.size(); ++k) {
        std::string stem = "sample_" + zero_pad(static_cast<int>(k), 4);
        write_image(generated[k], out_dir / (stem + (color ? ".ppm" : ".pgm")));
        save_snapshot(generated[k], out_dir / (stem + ".tsnap"));
    }
    std::vector<Field> reference;
    if (!config.reference_dir.empty()) reference = load_image_dir(config.reference_dir);
    if (generated.size() >= 2) {
        write_metrics_csv(out_dir / "metrics.csv", generated, reference, config.seed);
    }
    write_manifest(out_dir, "sample", config);
}

void cmd_sdedit(const RunConfig& config) {
    fs::path out_dir = require_out_dir(config);
    if (config.image.empty()) throw ConfigError("sdedit needs image=PATH (the guide)");
    Field guide = read_image(config.image);
    double t0 = config.t0 < 0.0 ? config.terminal_time / 2.0 : config.t0;
    if (!(t0 > 0.0) || t0 > config.terminal_time) {
        throw ConfigError("t0 must lie in (0, T]");
    }
    if (config.kmeans_guide) {
        guide = kmeans_stroke_guide(guide, config.kmeans_k, 25, config.seed);
        bool color = guide.channels() == 3;
        write_image(guide, out_dir / (color ? "guide.ppm" : "guide.pgm"));
    }

    ScoreSetup setup = make_score_setup(config);
    if (guide.channels() != setup.channels || guide.height() != setup.height ||
        guide.width() != setup.width) {
        throw ConfigError("guide shape does not match the score model");
    }
    BackwardInstance bi{setup.instance, setup.score,
                        StepperConfig{config.dt, config.gamma, 0}};
    CorrectorConfig cc{config.corrector_steps, config.corrector_snr};
    std::vector<Field> outputs =
        sdedit(bi, guide, t0, config.n_samples, config.seed, 0, cc, config.threads);

    std::ofstream csv(out_dir / "edge_correlation.csv");
    if (!csv) throw IoError("cannot write edge_correlation.csv");
    csv << "metric,value,n,seed\n";
    csv.precision(12);
    bool color = setup.channels == 3;
    double mean_corr = 0.0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        std::string stem = "sdedit_" + zero_pad(static_cast<int>(k), 4);
        write_image(outputs[k], out_dir / (stem + (color ? ".ppm" : ".pgm")));
        save_snapshot(outputs[k], out_dir / (stem + ".tsnap"));
        double corr = edge_correlation(guide, outputs[k]);
        mean_corr += corr;
        csv << "edge_correlation_" << k << "," << corr << "," << outputs.size() << ","
            << config.seed << "\n";
    }
    if (!outputs.empty()) {
        csv << "edge_correlation_mean," << mean_corr / static_cast<double>(outputs.size()) << ","
            << outputs.size() << "," << config.seed << "\n";
    }
    std::ostringstream extra;
    extra << "t0_effective=" << t0 << "\n";
    if (t0 == config.terminal_time) {
        extra << "note=t0 equals T; outputs are unconditional draws from the simulated prior\n";
    }
    write_manifest(out_dir, "sdedit", config, extra.str());
}

void cmd_calibrate_prior(const RunConfig& config) {
    fs::path out_dir = require_out_dir(config);
    std::vector<Field> calibration = load_dataset(config);
    const Field& probe = calibration.front();
    SpdeInstance instance(config.make_schedule(std::max(probe.height(), probe.width())));

    std::string method;
    GaussianLaw law;
    if (instance.sde_class() == SdeClass::LinearAdditive) {
        law = prior_law(instance, probe.channels(), probe.height(), probe.width(), calibration);
        method = "closed-form";
    } else {
        PriorCalibrationConfig cal;
        cal.n_simulations = std::max(256, config.n_samples);
        cal.stepper = StepperConfig{config.dt, config.gamma, 0};
        cal.seed = config.seed;
        law = prior_law(instance, probe.channels(), probe.height(), probe.width(), calibration,
                        cal);
        method = "empirical-" + std::to_string(cal.n_simulations);
    }
    save_prior(out_dir / "prior", law, method);
    write_manifest(out_dir, "calibrate-prior", config, "method=" + method + "\n");
}

}  // namespace asgm::cli
