#pragma once

#include <functional>
#include <vector>

namespace asgm {

/// Composite Simpson rule over [a, b] with `panels` subintervals (even,
/// default 1000).
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 1000);

/// Cumulative integral A_j = int_a^{s_j} f on the uniform nodes
/// s_j = a + j (b-a)/n, j = 0..n (n even). Even nodes use composite Simpson
/// pairs; odd nodes use the three-point half-interval rule, keeping the
/// whole table fourth-order accurate.
std::vector<double> cumulative_integral(const std::function<double(double)>& f, double a,
                                        double b, int n = 1000);

}  // namespace asgm
