#pragma once

// Separated nets in the Bergman metric, perturbed point families and the
// greedy split of a sequence into separated subsequences.

#include "bcl/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcl {

struct Lattice {
    std::vector<Point> points;
    double r = 0.0;
    double truncation_radius = 0.0;
    int multiplicity_bound = 0;    // max overlap of the D(a_k, 4r) at probe points (truncated lattice)
    int interior_multiplicity = -1;  // same, over probes whose D(z, 4r) lies in the truncated ball; -1 if none
    double packing_bound = 0.0;    // (sinh(17r/4) / sinh(r/4))^{2n}: disjoint D(a, r/4) inside D(z, 4r + r/4)
    double min_separation = 0.0;   // min pairwise Bergman distance, capped at r
    double coverage_fraction = 0.0;
    std::size_t candidates_used = 0;

    Eigen::Index dim() const { return points.empty() ? 0 : points.front().size(); }
};

struct LatticeOptions {
    std::uint64_t seed = 1;
    std::size_t candidate_budget = 400000;
    std::size_t coverage_samples = 100000;
    std::size_t batch = 4096;
};

/// Thrown when the candidate budget runs out before coverage is verified.
class CoverageError : public std::runtime_error {
public:
    CoverageError(const std::string& what, double fraction) : std::runtime_error(what), fraction_(fraction) {}
    double coverage_fraction() const { return fraction_; }

private:
    double fraction_;
};

/// Greedy net of the ball {|z| <= truncation_radius}: points are kept at Bergman
/// distance >= r/2 from each other, so the D(a_k, r/4) are disjoint and, once
/// verified by sampling, the D(a_k, r) cover.
Lattice build_lattice(double r, double truncation_radius, int n, const LatticeOptions& options = {});

/// True when beta(z, w) < r, via 1 - rho^2 > 1 - tanh(r)^2 (no Mobius map needed).
bool within_bergman(const Point& z, const Point& w, double tanh_r);

struct PerturbedFamily {
    Point base;
    double N = 1.0;
    Eigen::MatrixXcd basis;      // orthonormal, first column a/|a|
    std::vector<Point> points;   // a^{j,N}, j = 1..n
    std::vector<Point> index_set;  // {a, a^{j,N^2}, a^{j,N^3}}; empty unless requested
};

/// a^{1,N} = (1 - N^2(1-|a|)) w_1 and a^{j,N} = a^{1,N} + N sqrt(1-|a|) w_j for j > 1.
Point perturbed_point(const Point& a, const Eigen::MatrixXcd& basis, Eigen::Index j, double N);

/// Requires a != 0, N >= 1, N^2(1-|a|) < 1, and N^6(1-|a|) < 1 when the index set is requested.
PerturbedFamily perturbed_family(const Point& a, double N, bool with_index_set = true);

struct Decomposition {
    std::vector<std::vector<std::size_t>> groups;  // indices into the input, M+1 groups
};

class DecompositionError : public std::runtime_error {
public:
    DecompositionError(const std::string& what, std::size_t witness) : std::runtime_error(what), witness_(witness) {}
    std::size_t witness() const { return witness_; }

private:
    std::size_t witness_;
};

/// Whether x may join a group already holding y: x lies outside every D(y^{j,N}, r)
/// and beta(x, y) >= R_out.
bool compatible(const Point& x, const Point& y, const PerturbedFamily& y_family, double r, double R_out);

/// First-fit assignment of seq into M+1 groups. Throws DecompositionError naming
/// the first point no group admits.
Decomposition decompose_separated(const std::vector<Point>& seq, double N, double r, int M, double R_out);

}  // namespace bcl
