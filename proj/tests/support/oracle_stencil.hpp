#pragma once

// Naive per-pixel transcription of the discretized drift and diffusion
// operators, used only as a test oracle. Kept deliberately independent of
// the production kernels: it walks the domain-decomposition index lists and
// evaluates the coefficient with its own arithmetic.

#include <vector>

#include "asgm/field.hpp"
#include "asgm/schedules.hpp"

namespace asgm_test {

/// b~(t, x) computed from the literal case analysis, channel by channel,
/// pixel list by pixel list.
asgm::Field naive_drift(const asgm::Schedule& schedule, double t, const asgm::Field& x);

/// (sigma~(t, x) eta) computed from the literal case analysis.
asgm::Field naive_diffusion(const asgm::Schedule& schedule, double t, const asgm::Field& x,
                            const asgm::Field& eta);

/// Dense matrix of the isotropic-limit operator (psi1 == 1) obtained by
/// substituting a unit coefficient into the naive transcription. Row-major,
/// one channel of an h x w grid.
std::vector<double> naive_isotropic_matrix(int height, int width);

}  // namespace asgm_test
