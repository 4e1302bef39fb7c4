#include "asgm/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asgm/errors.hpp"
#include "asgm/rng.hpp"

namespace asgm {

namespace {

// signed distance < 0 inside; coverage ramps over one pixel
double coverage(double sdf) { return std::clamp(0.5 - sdf, 0.0, 1.0); }

double disk_sdf(double x, double y, double cx, double cy, double r) {
    return std::hypot(x - cx, y - cy) - r;
}

double rect_sdf(double x, double y, double cx, double cy, double hw, double hh, double angle) {
    double ca = std::cos(angle), sa = std::sin(angle);
    double lx = ca * (x - cx) + sa * (y - cy);
    double ly = -sa * (x - cx) + ca * (y - cy);
    double dx = std::abs(lx) - hw;
    double dy = std::abs(ly) - hh;
    double outside = std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
    double inside = std::min(std::max(dx, dy), 0.0);
    return outside + inside;
}

double triangle_sdf(double px, double py, double ax, double ay, double bx, double by, double cx,
                    double cy) {
    auto seg = [&](double x0, double y0, double x1, double y1) {
        double ex = x1 - x0, ey = y1 - y0;
        double wx = px - x0, wy = py - y0;
        double t = std::clamp((wx * ex + wy * ey) / (ex * ex + ey * ey), 0.0, 1.0);
        double dx = wx - t * ex, dy = wy - t * ey;
        return dx * dx + dy * dy;
    };
    double d = std::sqrt(std::min({seg(ax, ay, bx, by), seg(bx, by, cx, cy), seg(cx, cy, ax, ay)}));
    double s1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    double s2 = (cx - bx) * (py - by) - (cy - by) * (px - bx);
    double s3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx);
    bool inside = (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
    return inside ? -d : d;
}

void paint(Field& img, int c, const std::vector<double>& sdf, double value) {
    auto ch = img.channel(c);
    for (std::size_t k = 0; k < ch.size(); ++k) {
        double a = coverage(sdf[k]);
        ch[k] = (1.0 - a) * ch[k] + a * value;
    }
}

}  // namespace

std::vector<Field> make_shapes_corpus(int count, int channels, int height, int width,
                                      std::uint64_t seed) {
    if (count < 0) throw ConfigError("shapes corpus count must be >= 0");
    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(count));
    const double H = height, W = width;
    for (int idx = 0; idx < count; ++idx) {
        RngStream rng(seed, static_cast<std::uint64_t>(idx));
        Field img(channels, height, width);
        for (int c = 0; c < channels; ++c) {
            double background = -0.9 + 0.6 * rng.uniform();
            auto ch = img.channel(c);
            for (double& v : ch) v = background;
        }
        int n_shapes = 2 + static_cast<int>(rng.next_u64() % 3);
        for (int s = 0; s < n_shapes; ++s) {
            int kind = static_cast<int>(rng.next_u64() % 3);
            double cx = W * (0.15 + 0.7 * rng.uniform());
            double cy = H * (0.15 + 0.7 * rng.uniform());
            double size = std::min(H, W) * (0.10 + 0.22 * rng.uniform());
            double value = 0.2 + 0.8 * rng.uniform();
            if (rng.uniform() < 0.4) value = -value;
            std::vector<double> sdf(static_cast<std::size_t>(height) * width);
            if (kind == 0) {
                for (int i = 0; i < height; ++i)
                    for (int j = 0; j < width; ++j)
                        sdf[static_cast<std::size_t>(i) * width + j] =
                            disk_sdf(j, i, cx, cy, size);
            } else if (kind == 1) {
                double angle = rng.uniform() * 3.14159265358979;
                double hw = size, hh = size * (0.4 + 0.6 * rng.uniform());
                for (int i = 0; i < height; ++i)
                    for (int j = 0; j < width; ++j)
                        sdf[static_cast<std::size_t>(i) * width + j] =
                            rect_sdf(j, i, cx, cy, hw, hh, angle);
            } else {
                double a0 = rng.uniform() * 6.28318530717959;
                double ax = cx + size * std::cos(a0), ay = cy + size * std::sin(a0);
                double bx = cx + size * std::cos(a0 + 2.1), by = cy + size * std::sin(a0 + 2.1);
                double tx = cx + size * std::cos(a0 + 4.2), ty = cy + size * std::sin(a0 + 4.2);
                for (int i = 0; i < height; ++i)
                    for (int j = 0; j < width; ++j)
                        sdf[static_cast<std::size_t>(i) * width + j] =
                            triangle_sdf(j, i, ax, ay, bx, by, tx, ty);
            }
            for (int c = 0; c < channels; ++c) {
                double channel_value = channels == 1
                                           ? value
                                           : std::clamp(value * (0.7 + 0.6 * rng.uniform()), -1.0,
                                                        1.0);
                paint(img, c, sdf, channel_value);
            }
        }
        out.push_back(std::move(img));
    }
    return out;
}

Field checkerboard_with_disk(int height, int width) {
    Field img(1, height, width);
    const int tile = std::max(2, std::min(height, width) / 8);
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            bool dark = ((i / tile) + (j / tile)) % 2 == 0;
            img.at(0, i, j) = dark ? -0.8 : 0.8;
        }
    }
    double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
    double r = 0.3 * std::min(height, width);
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            double a = coverage(disk_sdf(j, i, cx, cy, r));
            img.at(0, i, j) = (1.0 - a) * img.at(0, i, j) + a * 0.95;
        }
    }
    return img;
}

Field kmeans_stroke_guide(const Field& image, int k, int iterations, std::uint64_t seed) {
    if (k < 1) throw ConfigError("kmeans needs k >= 1");
    const int C = image.channels();
    const std::size_t npix = image.pixels_per_channel();
    auto pixel = [&](std::size_t p, int c) { return image.values()[c * npix + p]; };

    // init: deterministic draws from the pixel set
    RngStream rng(seed, 0x6b6d);
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(k),
                                             std::vector<double>(C, 0.0));
    for (int c0 = 0; c0 < k; ++c0) {
        std::size_t p = rng.next_u64() % npix;
        for (int c = 0; c < C; ++c) centers[c0][c] = pixel(p, c);
    }
    std::vector<int> assign(npix, 0);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t p = 0; p < npix; ++p) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int c0 = 0; c0 < k; ++c0) {
                double d = 0.0;
                for (int c = 0; c < C; ++c) {
                    double diff = pixel(p, c) - centers[c0][c];
                    d += diff * diff;
                }
                if (d < best) {
                    best = d;
                    arg = c0;
                }
            }
            assign[p] = arg;
        }
        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(C, 0.0));
        std::vector<long> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t p = 0; p < npix; ++p) {
            ++counts[assign[p]];
            for (int c = 0; c < C; ++c) sums[assign[p]][c] += pixel(p, c);
        }
        for (int c0 = 0; c0 < k; ++c0) {
            if (counts[c0] == 0) continue;  // empty cluster keeps its centroid
            for (int c = 0; c < C; ++c) centers[c0][c] = sums[c0][c] / counts[c0];
        }
    }
    Field out = Field::zeros_like(image);
    for (std::size_t p = 0; p < npix; ++p) {
        for (int c = 0; c < C; ++c) out.values()[c * npix + p] = centers[assign[p]][c];
    }
    return out;
}

}  // namespace asgm
