#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace asgm {

/// Discretized state: a channels x height x width grid of real intensities.
/// Values are stored channel-major, row-major. The working intensity range is
/// [-1, 1]; clamping happens only at image I/O, never inside the dynamics.
class Field {
public:
    Field() = default;
    Field(int channels, int height, int width, double fill = 0.0);

    static Field zeros_like(const Field& other) {
        return Field(other.channels_, other.height_, other.width_, 0.0);
    }

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return values_.size(); }
    std::size_t pixels_per_channel() const {
        return static_cast<std::size_t>(height_) * width_;
    }

    double& at(int c, int i, int j) { return values_[index(c, i, j)]; }
    double at(int c, int i, int j) const { return values_[index(c, i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::span<double> channel(int c) {
        return std::span<double>(values_).subspan(c * pixels_per_channel(), pixels_per_channel());
    }
    std::span<const double> channel(int c) const {
        return std::span<const double>(values_).subspan(c * pixels_per_channel(),
                                                        pixels_per_channel());
    }

    bool same_shape(const Field& other) const {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }

    bool all_finite() const;
    double max_abs() const;

    bool operator==(const Field& other) const {
        return same_shape(other) && values_ == other.values_;
    }

private:
    std::size_t index(int c, int i, int j) const {
        return (static_cast<std::size_t>(c) * height_ + i) * width_ + j;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> values_;
};

/// Classification of a pixel under the boundary decomposition.
enum class PixelClass { Interior, Left, Top, Right, Bottom };

/// The five-way partition of the index set {0..h-1} x {0..w-1}:
///   interior = {1..h-2} x {1..w-2}
///   left     = {0} x {0..w-2}
///   top      = {0..h-2} x {w-1}
///   right    = {h-1} x {1..w-1}
///   bottom   = {1..h-1} x {0}
/// Each of the four corners belongs to exactly one boundary set.
struct DomainDecomposition {
    int height = 0;
    int width = 0;
    std::vector<std::pair<int, int>> interior;
    std::vector<std::pair<int, int>> left;
    std::vector<std::pair<int, int>> top;
    std::vector<std::pair<int, int>> right;
    std::vector<std::pair<int, int>> bottom;

    PixelClass classify(int i, int j) const;
};

/// Partition the h x w index set. Throws DimensionError if h < 3 or w < 3.
DomainDecomposition decompose_domain(int height, int width);

}  // namespace asgm
