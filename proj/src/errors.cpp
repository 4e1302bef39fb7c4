#include "asgm/errors.hpp"

#include <sstream>

namespace asgm {

namespace {

std::string divergence_message(double time, double max_abs) {
    std::ostringstream os;
    os << "state diverged at t=" << time << " (max-abs " << max_abs << ")";
    return os.str();
}

}  // namespace

DivergenceError::DivergenceError(double time, double max_abs)
    : NumericError(divergence_message(time, max_abs)), time_(time), max_abs_(max_abs) {}

TrainingDivergedError::TrainingDivergedError(long iteration)
    : NumericError("training loss became non-finite at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

}  // namespace asgm
