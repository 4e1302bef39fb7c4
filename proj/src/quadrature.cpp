#include "asgm/quadrature.hpp"

#include "asgm/errors.hpp"

namespace asgm {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels < 2 || panels % 2 != 0) throw ConfigError("simpson panels must be even and >= 2");
    if (b == a) return 0.0;
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int j = 1; j < panels; ++j) {
        acc += f(a + j * h) * (j % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f, double a,
                                        double b, int n) {
    if (n < 2 || n % 2 != 0) throw ConfigError("cumulative integral nodes must be even and >= 2");
    const double h = (b - a) / n;
    std::vector<double> fs(n + 1);
    for (int j = 0; j <= n; ++j) fs[j] = f(a + j * h);
    std::vector<double> A(n + 1, 0.0);
    for (int j = 0; j + 2 <= n; j += 2) {
        A[j + 1] = A[j] + h / 12.0 * (5.0 * fs[j] + 8.0 * fs[j + 1] - fs[j + 2]);
        A[j + 2] = A[j] + h / 3.0 * (fs[j] + 4.0 * fs[j + 1] + fs[j + 2]);
    }
    return A;
}

}  // namespace asgm
