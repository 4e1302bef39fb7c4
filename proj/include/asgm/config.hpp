#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "asgm/schedules.hpp"

namespace asgm {

/// Parsed key=value run configuration. Parsing is strict: an unknown key
/// aborts before any compute.
struct RunConfig {
    // instance selection: a preset name, or explicit schedule keys
    std::string preset;  // ve-noise | aniso-heat | iso-heat | "" (explicit)
    std::string phi1_kind = "constant";
    double phi1_min = 0.0, phi1_max = 0.0, phi1_exponent = 1.0;
    std::string phi2_kind = "constant";
    double phi2_min = 0.0, phi2_max = 0.0, phi2_exponent = 1.0;
    std::string lambda1_kind = "infinite";
    double lambda1_min = 0.025, lambda1_exponent = 0.5;
    std::string lambda2_kind = "infinite";
    double lambda2_min = 0.025, lambda2_exponent = 0.5;
    double terminal_time = 2.0;
    double epsilon = 0.0;

    // stepping
    double dt = 1e-2;
    double gamma = 1.0;
    int record_every = 50;

    // sampling
    std::uint64_t seed = 0;
    int n_samples = 1;
    int corrector_steps = 1;
    double corrector_snr = 0.16;
    std::string score_source = "checkpoint";  // analytic | checkpoint

    // sdedit
    double t0 = -1.0;  // < 0: default T/2
    int kmeans_k = 8;
    bool kmeans_guide = false;

    // training
    long train_iterations = 2000;
    int train_batch = 8;
    double train_lr = 1e-3;
    int train_width = 256;

    // data
    std::string data_dir;
    std::string synthetic;  // "" | shapes | checkerboard
    int data_count = 200;
    int data_size = 32;
    int data_channels = 1;

    // paths
    std::string out_dir;
    std::string checkpoint;
    std::string image;
    std::string reference_dir;
    std::string prior_file;
    std::string calibration_dir;

    int threads = 0;  // 0: hardware concurrency

    /// Build the schedule: the preset when set, otherwise the explicit keys.
    Schedule make_schedule(int image_size) const;

    /// Normalized key=value echo (sorted keys), used in manifests so a run
    /// can be reproduced bit-identically.
    std::string echo() const;
};

/// Parse key=value lines ('#' starts a comment). Unknown keys, malformed
/// values, and duplicate keys raise ConfigError.
RunConfig parse_config_text(const std::string& text);

RunConfig load_config_file(const std::filesystem::path& path);

}  // namespace asgm
