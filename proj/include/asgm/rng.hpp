#pragma once

#include <cstdint>

#include "asgm/field.hpp"

namespace asgm {

/// Counter-based normal/uniform generator. Draw n of stream (seed, id) is a
/// pure function of (seed, id, n), so identical streams reproduce identical
/// sequences across runs and thread schedules, and distinct stream ids give
/// independent streams for parallel trajectories.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint64_t counter() const { return counter_; }

    /// Jump to an absolute draw index.
    void set_counter(std::uint64_t counter) { counter_ = counter; }

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; consumes exactly two counter steps.
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// I.i.d. Normal(0, dt) entries per pixel per channel; requires dt > 0.
Field brownian_increment(RngStream& rng, int channels, int height, int width, double dt);

inline Field brownian_increment(RngStream& rng, const Field& like, double dt) {
    return brownian_increment(rng, like.channels(), like.height(), like.width(), dt);
}

/// Field of standard normals (unit variance).
Field standard_normal_field(RngStream& rng, int channels, int height, int width);

}  // namespace asgm
