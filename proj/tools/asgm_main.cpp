#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "asgm/config.hpp"
#include "asgm/errors.hpp"
#include "asgm/log.hpp"
#include "asgm/version.hpp"
#include "commands.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = -1;
    bool seed_set = false;
};

void attach_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.config_path, "key=value configuration file");
    sub->add_option("--out", flags.out_dir, "output directory (overrides out.dir)");
    sub->add_option("--seed", flags.seed, "RNG seed (overrides the config seed)")
        ->each([&](const std::string&) { flags.seed_set = true; });
    sub->add_option("--threads", flags.threads, "worker cap, 0 = hardware (overrides config)");
}

asgm::RunConfig resolve(const CommonFlags& flags) {
    asgm::RunConfig config;
    if (!flags.config_path.empty()) config = asgm::load_config_file(flags.config_path);
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.seed_set) config.seed = flags.seed;
    if (flags.threads >= 0) config.threads = flags.threads;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic SPDE score-based generative modeling workbench"};
    app.set_version_flag("--version", std::string(asgm::kVersion));
    app.require_subcommand(1);

    CommonFlags flags;
    auto* forward = app.add_subcommand(
        "forward", "Simulate the forward destruction rows and write a montage");
    auto* train = app.add_subcommand("train", "Train a score network on an image dataset");
    auto* sample = app.add_subcommand("sample", "Generate unconditional samples");
    auto* sdedit = app.add_subcommand("sdedit", "Stroke-guided generation from a guide image");
    auto* calibrate = app.add_subcommand("calibrate-prior",
                                         "Fit and store the terminal-time prior parameters");
    for (CLI::App* sub : {forward, train, sample, sdedit, calibrate}) {
        attach_common(sub, flags);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        asgm::RunConfig config = resolve(flags);
        if (forward->parsed()) asgm::cli::cmd_forward(config);
        else if (train->parsed()) asgm::cli::cmd_train(config);
        else if (sample->parsed()) asgm::cli::cmd_sample(config);
        else if (sdedit->parsed()) asgm::cli::cmd_sdedit(config);
        else if (calibrate->parsed()) asgm::cli::cmd_calibrate_prior(config);
        return 0;
    } catch (const asgm::DivergenceError& e) {
        asgm::log_error(e.what());
        return 3;
    } catch (const asgm::NumericError& e) {
        asgm::log_error(e.what());
        return 3;
    } catch (const asgm::ConfigError& e) {
        asgm::log_error(e.what());
        return 2;
    } catch (const asgm::IoError& e) {
        asgm::log_error(e.what());
        return 4;
    } catch (const std::exception& e) {
        asgm::log_error(std::string("unexpected failure: ") + e.what());
        return 1;
    }
}
