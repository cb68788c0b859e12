#pragma once

// One-dimensional quadrature: Gauss-Legendre rules, adaptive Gauss-Kronrod,
// and a boundary-graded composite rule on [0, 1).

#include <cstddef>
#include <functional>
#include <vector>

namespace bcl {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t m, double a = -1.0, double b = 1.0);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [a, b].
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-10, double abs_tol = 0.0, std::size_t max_intervals = 2000);

/// Composite Gauss-Legendre rule on [0, 1) graded toward 1: the panel [0, 1/2]
/// followed by dyadic shells [1 - 2^-k, 1 - 2^-(k+1)] for k = 1 .. shells.
/// The uncovered tail has length 2^-(shells+1).
QuadratureRule graded_unit_rule(std::size_t nodes_per_panel, std::size_t shells);

/// Index of the dyadic shell containing rho: 0 for rho < 1/2, k for 1-2^-k <= rho < 1-2^-(k+1).
std::size_t dyadic_shell(double rho);

}  // namespace bcl
