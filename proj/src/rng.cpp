#include "asgm/rng.hpp"

#include <cmath>
#include <numbers>

#include "asgm/errors.hpp"

namespace asgm {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    key_ = mix64(mix64(seed + kGolden) ^ mix64(stream_id * kGolden + 0x5851F42D4C957F2DULL));
}

std::uint64_t RngStream::next_u64() { return mix64(key_ + (counter_++) * kGolden); }

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Field brownian_increment(RngStream& rng, int channels, int height, int width, double dt) {
    if (!(dt > 0.0)) throw ConfigError("brownian increment requires dt > 0");
    Field f(channels, height, width);
    double scale = std::sqrt(dt);
    for (double& v : f.values()) v = scale * rng.normal();
    return f;
}

Field standard_normal_field(RngStream& rng, int channels, int height, int width) {
    Field f(channels, height, width);
    for (double& v : f.values()) v = rng.normal();
    return f;
}

}  // namespace asgm
