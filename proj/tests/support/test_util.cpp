#include "support/test_util.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace asgm_test {

asgm::Field random_field(asgm::RngStream& rng, int channels, int height, int width) {
    asgm::Field f(channels, height, width);
    for (double& v : f.values()) v = 2.0 * rng.uniform() - 1.0;
    return f;
}

double max_abs_diff(const asgm::Field& a, const asgm::Field& b) {
    if (!a.same_shape(b)) throw std::logic_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t k = 0; k < av.size(); ++k) {
        m = std::max(m, std::abs(av[k] - bv[k]));
    }
    return m;
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("asgm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace asgm_test
