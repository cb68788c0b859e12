#pragma once

// Test functions in A^p_omega, their norms, operator images and the
// fixed function batteries used as lower-bound probes.

#include "bcl/geometry.hpp"
#include "bcl/measure.hpp"
#include "bcl/weights.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bcl {

/// Raised when |1 - <z, a>| < 1e-14 for a kernel center a.
class NearSingularity : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kSingularityTolerance = 1e-14;

namespace fn {
/// (1 - <z, a>)^{-s}, principal branch.
struct KernelPower {
    Point a;
    double s = 1.0;
};
/// hat(a)^{-1/p} (1-|a|^2)^{-n/p} ((1-|a|^2) / (1 - <z, a>))^{(gamma+n)/p}.
struct NormalizedTest {
    Point a;
    double gamma = 0.0;
    double p = 2.0;
    double hat_a = 1.0;  // hat omega(|a|)
};
/// sum_k lambda_k (1-|a_k|^2)^{t-n/p} hat(a_k)^{-1/p} (1 - <z, b_k>)^{-t}.
struct LatticeSum {
    std::vector<std::complex<double>> coeffs;
    std::vector<Point> centers;
    std::vector<Point> eval_centers;
    double t = 0.0;
    double p = 2.0;
    std::vector<double> log_scales;  // log of the real atom factor
    double min_separation = 0.0;
    bool exponent_gate_ok = true;    // t above the fitted threshold
};
/// sum_m c_m z^{alpha_m}.
struct Polynomial {
    std::vector<std::vector<int>> exponents;
    std::vector<std::complex<double>> coeffs;
};
struct Constant {
    std::complex<double> c;
};
/// z_j, 1-based.
struct Coordinate {
    int j = 1;
};
}  // namespace fn

class HoloFunction {
public:
    using Variant = std::variant<fn::KernelPower, fn::NormalizedTest, fn::LatticeSum, fn::Polynomial, fn::Constant,
                                 fn::Coordinate>;

    HoloFunction(Variant v, int n);

    static HoloFunction constant(int n, std::complex<double> c) { return HoloFunction(fn::Constant{c}, n); }
    static HoloFunction coordinate(int n, int j) { return HoloFunction(fn::Coordinate{j}, n); }
    static HoloFunction kernel_power(const Point& a, double s);
    static HoloFunction monomial(std::vector<int> exponent, std::complex<double> c = 1.0);
    /// gamma defaults to n (lambda0 + 1) from the weight diagnostics.
    static HoloFunction normalized_test(const Point& a, const RadialWeight& w, double p,
                                        std::optional<double> gamma = std::nullopt);

    /// Unchecked evaluation; kernel variants still raise NearSingularity.
    std::complex<double> operator()(const Point& z) const;

    /// Points of the ball near which |f| concentrates (kernel centers).
    std::vector<Point> foci() const;

    int dimension() const { return n_; }
    const Variant& variant() const { return v_; }
    std::string describe() const;

private:
    Variant v_;
    int n_;
};

/// A complex function on the ball that need not be holomorphic.
struct MeasurableFunction {
    ComplexField f;
    int n = 1;
    std::vector<Point> foci;
    std::string description;

    std::complex<double> operator()(const Point& z) const { return f(z); }
    static MeasurableFunction from(const HoloFunction& h);
};

/// Checked evaluation: z must be interior.
std::complex<double> evaluate(const HoloFunction& f, const Point& z);
std::complex<double> evaluate(const MeasurableFunction& f, const Point& z);

struct PolarSettings {
    std::size_t sphere_samples = 4096;
    std::size_t radial_nodes = 12;  // Gauss nodes per dyadic shell
    std::size_t shells = 36;        // last node at 1 - 2^-37
    std::uint64_t seed = 1;
    std::size_t chunk = 256;
};

/// Writes the integrand at z = rho_node zeta for each output.
using PolarIntegrand = std::function<void(const Point& z, std::size_t node, std::span<double> out)>;

struct PolarResult {
    std::vector<double> value;
    std::vector<double> se;
    std::vector<char> divergent;  // the last four shells carry more than 1e-3 of the total
    std::vector<double> rho;      // radial nodes, for building per-node tables
};

/// Radial nodes of the graded rule used by polar_integrate.
std::vector<double> polar_nodes(const PolarSettings& settings);

/// int_B h dV = 2n int_0^1 rho^{2n-1} int_S h(rho zeta) dsigma drho: graded Gauss rule in rho,
/// sphere Monte Carlo drawn from a mixture of sigma and the Poisson-Szego densities at the foci.
/// Beyond the last shell the integrand is held at its last-node value.
PolarResult polar_integrate(int n, const std::vector<Point>& foci, std::size_t outputs, const PolarIntegrand& h,
                            const PolarSettings& settings = {});

struct NormResult {
    double value = 0.0;
    double se = 0.0;
    bool divergent = false;
};

/// ||f||_{A^p_omega} for every (weight, p) pair on shared samples; result[w][p].
std::vector<std::vector<NormResult>> bergman_norms(const HoloFunction& f, const std::vector<RadialWeight>& weights,
                                                   const std::vector<double>& ps, const PolarSettings& settings = {});

NormResult bergman_norm(const HoloFunction& f, const RadialWeight& w, double p, const PolarSettings& settings = {});

/// (int |f|^q dmu)^{1/q}, one polar integral per measure term.
NormResult lq_norm(const MeasurableFunction& f, const Measure& mu, double q, const PolarSettings& settings = {});

/// z -> u(z) f(phi(z)) - v(z) f(psi(z)).
MeasurableFunction apply_difference(const WeightFactor& u, const WeightFactor& v, const SymbolMap& phi,
                                    const SymbolMap& psi, const HoloFunction& f);

/// The atomic sum F. Throws std::domain_error on repeated centers or mismatched sizes;
/// a t at or below n + (beta_est + lambda0 n + n)/p is recorded in exponent_gate_ok, not rejected.
HoloFunction make_lattice_sum(std::vector<std::complex<double>> coeffs, std::vector<Point> centers,
                              std::vector<Point> eval_centers, double t, const RadialWeight& w, double p,
                              std::optional<DoublingDiagnostics> diagnostics = std::nullopt);

struct OscillationRatio {
    double ratio = 0.0;
    double se = 0.0;
    double integral = 0.0;  // int_{D(a, r1)} |f|^p W dV
    double integral_se = 0.0;
};

/// |f(a)-f(b)|^q / (rho(a,b)^q ((1-|a|)^n hat(a))^{-q/p} int_{D(a,r1)} |f|^p W dV); b = a gives 0.
/// W is the twisted weight of omega. Requires 0 < r2 < r1 < 1 and beta(a, b) < r2.
OscillationRatio oscillation_ratio(const HoloFunction& f, const Point& a, const Point& b, double r1, double r2,
                                   const RadialWeight& w, const RadialWeight& W, double p, double q,
                                   const McSettings& mc = {});

struct HatMuCheck {
    double lhs = 0.0;  // int |f|^q dmu
    double lhs_se = 0.0;
    double rhs = 0.0;  // ||f||^{q-p} int |f|^p hat mu_{omega,r,q/p} W dV
    double rhs_se = 0.0;
    double ratio = 0.0;  // lhs / rhs
    double ratio_se = 0.0;
};

struct HatMuSettings {
    std::size_t outer_samples = 1024;
    McSettings inner{128, 1, 128};
    PolarSettings norms{};
};

/// Both sides of int |f|^q dmu <= C ||f||^{q-p} int |f|^p hat mu W dV for p <= q.
HatMuCheck hat_mu_check(const HoloFunction& f, const Measure& mu, const RadialWeight& w, const RadialWeight& W,
                        double r, double p, double q, const HatMuSettings& settings = {});

struct BatteryEntry {
    std::string label;
    HoloFunction f;
    bool boundary_kernel = false;  // normalized kernel with |a| >= 0.9
};

inline constexpr const char* kBatteryVersion = "battery/1";

/// Fixed list of 20 functions: 1, z_1, ..., z_1^6, a mixed polynomial, normalized kernels at the
/// origin and at |a| in {0.5, 0.9, 0.99} along three directions, and two lattice sums.
std::vector<BatteryEntry> battery(int n, const RadialWeight& w, double p,
                                  std::optional<DoublingDiagnostics> diagnostics = std::nullopt);

/// Directions used by the battery: e_1, then (e_1 + i e_n)/sqrt 2, then a fixed generic unit vector.
std::vector<Point> battery_directions(int n);

}  // namespace bcl
