#pragma once

// Property suites over geometry, weights and lattices, as run by the
// geometry-suite, weights-suite and lattice-suite tasks.

#include "bcl/lattice.hpp"
#include "bcl/weights.hpp"

#include <cstdint>
#include <vector>

namespace bcl {

struct GeometryCaseSummary {
    int n = 1;
    std::size_t cases = 0;
    double mobius_invariance_max = 0.0;  // max |rho(phi_c(a), phi_c(z)) - rho(a, z)|
    double involution_max = 0.0;         // max |phi_a(phi_a(z)) - z|
    std::size_t membership_checked = 0;  // cases outside the band |beta - r| < kMembershipBand
    std::size_t membership_disagreements = 0;
    std::size_t tube_samples = 0;
    std::size_t tube_violations = 0;
};

struct GeometrySuiteSettings {
    std::vector<int> dimensions{1, 2, 3};
    std::size_t cases = 10000;
    std::vector<double> tube_t{0.0, 0.5, 0.9, 0.99, 0.999};
    std::vector<double> tube_r{0.1, 0.3, 0.5, 0.7, 0.75};
    std::size_t tube_samples = 500;  // per (n, t, r), half of them on the ellipsoid boundary
    std::uint64_t seed = 1;
};

std::vector<GeometryCaseSummary> geometry_suite(const GeometrySuiteSettings& settings = {});

struct WeightsSuiteReport {
    DoublingDiagnostics diagnostics;
    double doubling_radius = 0.0;     // 1 - 2^-20
    double doubling_ratio = 0.0;      // hat(r) / hat((1+r)/2) there
    double twisted_ratio_min = 0.0;   // min of hat W / hat omega on r = i/1000, i = 0 .. 999
    double twisted_ratio_max = 0.0;
    std::vector<double> kernel_radii;   // nine log-spaced radii in [0.5, 0.99]
    std::vector<double> kernel_ratios;  // kernel_integral / proxy at lambda = lambda0 + 0.25, t = 0
    double kernel_slope = 0.0;          // least-squares slope of log ratio against log(1 - |a|)
    bool kernel_divergent = false;
};

WeightsSuiteReport weights_suite(const RadialWeight& w);

struct LatticeSuiteReport {
    Lattice lattice;
    std::size_t coverage_samples = 0;
    std::size_t coverage_misses = 0;     // fresh samples of the truncated ball with no point within r
    double min_pairwise_distance = 0.0;  // exact, over all pairs
    bool quarter_disjoint = false;       // min pairwise distance >= r/2
    bool multiplicity_within_packing = false;
    std::size_t decomposition_points = 0;
    std::size_t decomposition_groups = 0;
    bool decomposition_partition = false;
    bool decomposition_separated = false;
    bool decomposition_blocked = false;  // first-fit found no assignment
};

struct LatticeSuiteSettings {
    double r = 0.6;
    double truncation = 0.9;
    int n = 1;
    std::size_t coverage_samples = 100000;
    std::uint64_t seed = 1;
    // decompose_separated on the lattice points with N^2 (1 - |a|) < 1/2
    double N = 1.2;
    int M = 48;
    double R_out = 0.3;
};

LatticeSuiteReport lattice_suite(const LatticeSuiteSettings& settings = {});

}  // namespace bcl
