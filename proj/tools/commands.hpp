#pragma once

#include <string>

#include "asgm/config.hpp"

namespace asgm::cli {

/// The five workflows. Each writes its artifacts plus a manifest that
/// reproduces the run bit-identically (config echo, seeds, version; no
/// timestamps). All return void and signal failure by throwing.
void cmd_forward(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_sample(const RunConfig& config);
void cmd_sdedit(const RunConfig& config);
void cmd_calibrate_prior(const RunConfig& config);

}  // namespace asgm::cli
