#include "asgm/field.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "asgm/errors.hpp"

namespace asgm {

Field::Field(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
    if (channels < 1 || height < 1 || width < 1) {
        throw DimensionError("field dimensions must be positive, got " +
                             std::to_string(channels) + "x" + std::to_string(height) + "x" +
                             std::to_string(width));
    }
    values_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

bool Field::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

PixelClass DomainDecomposition::classify(int i, int j) const {
    if (i == 0 && j <= width - 2) return PixelClass::Left;
    if (j == width - 1 && i <= height - 2) return PixelClass::Top;
    if (i == height - 1 && j >= 1) return PixelClass::Right;
    if (j == 0 && i >= 1) return PixelClass::Bottom;
    return PixelClass::Interior;
}

DomainDecomposition decompose_domain(int height, int width) {
    if (height < 3 || width < 3) {
        throw DimensionError("domain decomposition requires height and width >= 3, got " +
                             std::to_string(height) + "x" + std::to_string(width));
    }
    DomainDecomposition d;
    d.height = height;
    d.width = width;
    for (int i = 1; i <= height - 2; ++i)
        for (int j = 1; j <= width - 2; ++j) d.interior.emplace_back(i, j);
    for (int j = 0; j <= width - 2; ++j) d.left.emplace_back(0, j);
    for (int i = 0; i <= height - 2; ++i) d.top.emplace_back(i, width - 1);
    for (int j = 1; j <= width - 1; ++j) d.right.emplace_back(height - 1, j);
    for (int i = 1; i <= height - 1; ++i) d.bottom.emplace_back(i, 0);
    return d;
}

}  // namespace asgm
