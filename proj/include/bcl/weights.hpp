#pragma once

// Radial weights on the unit ball and the quantities built from them.

#include "bcl/geometry.hpp"
#include "bcl/parallel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bcl {

/// Gamma(n+alpha+1) / (Gamma(n+1) Gamma(alpha+1)) (1-r^2)^alpha, normalized so that omega(B_n) = 1.
struct StandardAlpha {
    double alpha = 0.0;
};

/// (1-r)^alpha (log(e/(1-r)))^b.
struct PowerLog {
    double alpha = 0.0;
    double b = 0.0;
};

/// Samples (r_i, omega(r_i)); log omega is interpolated linearly in r. Beyond the
/// last node omega follows a power of (1-r) with exponent tail_exponent, fitted
/// from the last two nodes when not given.
struct Tabulated {
    std::vector<double> r;
    std::vector<double> values;
    std::optional<double> tail_exponent;
};

using WeightVariant = std::variant<StandardAlpha, PowerLog, Tabulated>;

class RadialWeight {
public:
    /// Validates positivity and integrability; throws std::invalid_argument otherwise.
    RadialWeight(WeightVariant variant, int n);

    static RadialWeight standard(double alpha, int n) { return RadialWeight(StandardAlpha{alpha}, n); }

    double operator()(double r) const;
    double operator()(const Point& z) const { return (*this)(z.norm()); }

    /// hat omega(r) = int_r^1 omega(s) ds.
    double hat(double r) const;

    /// omega(B_n) = int omega dV.
    double total_mass() const { return total_mass_; }

    int dimension() const { return n_; }
    const WeightVariant& variant() const { return variant_; }
    std::string describe() const;

    /// Standard weight with integer alpha; the cases with closed forms.
    bool has_closed_form() const;

private:
    WeightVariant variant_;
    int n_;
    double normalizer_ = 1.0;
    // Tabulated caches.
    std::vector<double> log_values_;
    std::vector<double> suffix_;  // int_{r_i}^1 omega
    double tail_exponent_ = 0.0;
    double total_mass_ = 1.0;

    double hat_tabulated(double r) const;
};

/// hat omega(r), with r checked against [0, 1].
double hat_omega(const RadialWeight& w, double r);

/// int_0^1 omega(rho) g(rho) d(rho) by adaptive quadrature on dyadic shells; g must be bounded near 1.
double integrate_radial(const RadialWeight& w, const std::function<double(double)>& g, double rel_tol = 1e-10,
                        std::size_t shells = 48);

/// Grid r_k = 1 - 2^-k, k = 0 .. depth.
std::vector<double> dyadic_grid(int depth);

struct ReversePair {
    double C = 0.0;  // min over the grid of hat(r) / hat(1 - (1-r)/K)
    double K = 0.0;
};

struct DoublingDiagnostics {
    double doubling_sup = 0.0;
    ReversePair reverse_pair;
    double lambda_est = 0.0;  // smallest local log-log slope over the tail half
    double beta_est = 0.0;    // largest local log-log slope over the tail half
    double regression_slope = 0.0;
    // hat(s)/hat(t) <= C_upper ((1-s)/(1-t))^beta_est and >= C_lower ((1-s)/(1-t))^lambda_est over all grid pairs.
    double C_upper = 0.0;
    double C_lower = 0.0;
    double lambda0 = 0.0;  // beta_est + 1; used only to gate warnings
};

DoublingDiagnostics doubling_diagnostics(const RadialWeight& w, const std::vector<double>& grid);
inline DoublingDiagnostics doubling_diagnostics(const RadialWeight& w) { return doubling_diagnostics(w, dyadic_grid(20)); }

/// W(r) = hat omega(r) / (1-r).
RadialWeight twisted_weight(const RadialWeight& w);

enum class BallRegion { BergmanBall, CarlesonBlock };

struct BallMass {
    double value = 0.0;
    double se = 0.0;
    double comparator = 0.0;  // (1-|a|)^n hat omega(|a|)
    bool flagged = false;     // se above the requested relative tolerance
};

/// omega(D(a,r)) or omega(S_a) by seeded Monte Carlo. S_a is the tube at a/|a| of width 1-|a|; S_0 = B_n.
BallMass ball_mass(const RadialWeight& w, const Point& a, double r, BallRegion region, const McSettings& mc = {},
                   double target_rel_se = 0.05);

/// Sphere average of |1 - <zeta, eta>|^{-2c} over zeta, as a function of x = |eta| < 1.
double sphere_kernel_average(int n, double c, double x);

struct KernelIntegral {
    double value = 0.0;
    double proxy = 0.0;          // hat omega(|a|) / (1-|a|)^{lambda n + t}
    bool out_of_theory = false;  // lambda <= lambda0 estimate, or t outside {0} and (beta_est, inf)
    bool divergent = false;      // shell contributions do not decay; value is a truncation
};

/// int omega(z) / ((1-|z|^2)^t |1 - <z,a>|^{lambda n + n}) dV(z) by polar decomposition.
KernelIntegral kernel_integral(const RadialWeight& w, const Point& a, double lambda, double t,
                               std::optional<DoublingDiagnostics> diagnostics = std::nullopt);

}  // namespace bcl
