#pragma once

// Carleson criteria in both regimes, operator-level checks built from the
// composite measures, compactness probes and the local inequality audit.
//
// Verdicts read only recorded numbers against the thresholds below. A finite
// grid cannot certify a limit, so every "yes" or "no" is relative to these
// declared constants.

#include "bcl/holo.hpp"
#include "bcl/lattice.hpp"
#include "bcl/measure.hpp"
#include "bcl/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bcl {

enum class Verdict { Yes, No, Inconclusive };

const char* to_string(Verdict v);

namespace thresholds {
inline constexpr const char* kVersion = "verdict/1";
/// "bounded": the sup grows by less than this fraction over the last dyadic step.
inline constexpr double kBoundedGrowth = 0.10;
/// "vanishing" and "finite tail": fitted log-log slope below this value.
inline constexpr double kTrendSlope = -0.10;
/// Standard errors of margin required on either side of a threshold.
inline constexpr double kMarginSe = 3.0;
/// Points whose relative SE exceeds this are unusable for a verdict.
inline constexpr double kMaxRelSe = 0.25;
}  // namespace thresholds

/// Least-squares slope of log(value) against log(1/(1-|a|)), with SE propagated from the value SEs.
struct TrendFit {
    double slope = 0.0;
    double se = 0.0;
    std::size_t points = 0;
};

TrendFit fit_trend(const std::vector<double>& radii, const std::vector<double>& values, const std::vector<double>& se);

/// One dyadic level: the largest value over the grid directions at |a| = 1 - 2^-k,
/// or the sum over a radial shell.
struct LevelSummary {
    int k = 0;
    double radius = 0.0;
    double value = 0.0;
    double se = 0.0;
};

struct CarlesonSettings {
    int depth = 10;       // boundary grid 1 - 2^-k, k = 1 .. depth
    int directions = 3;
    McSettings mc{2048, 1, 256};
    int shells = 12;                   // radial shells for the integral criterion
    std::size_t shell_samples = 256;   // outer samples per shell
    McSettings inner{256, 1, 256};     // per-point mean function budget (seed is drawn per point)
    double lattice_truncation = 0.995;
};

struct CarlesonReport {
    std::string regime;  // "p<=q" or "q<p"
    double r = 0.0;
    double s = 0.0;  // exponent of the averaging function

    // p <= q
    MeanProfile profile;
    std::vector<LevelSummary> levels;
    double sup = 0.0;
    double sup_se = 0.0;
    double sup_previous = 0.0;
    TrendFit tail;

    // q < p: condition (iii) integral and condition (iv) lattice sum
    double integral = 0.0;  // int hat mu_{omega,r}^{p/(p-q)} W dV over the truncated ball
    double integral_se = 0.0;
    std::vector<LevelSummary> integral_shells;
    TrendFit integral_tail;
    Verdict integral_finite = Verdict::Inconclusive;
    double lattice_sum = 0.0;  // sum_k hat mu_{omega,r,q/p}(a_k)^{p/(p-q)}
    double lattice_se = 0.0;
    std::vector<LevelSummary> lattice_shells;
    TrendFit lattice_tail;  // per-point slope of the summands plus n
    Verdict lattice_finite = Verdict::Inconclusive;
    std::size_t lattice_points = 0;
    double truncation_radius = 0.0;
    bool paths_agree = true;

    Verdict bounded = Verdict::Inconclusive;
    Verdict vanishing = Verdict::Inconclusive;
    std::string bounded_reason;
    std::string vanishing_reason;
    std::vector<std::string> warnings;
};

/// Sup criterion for p <= q on the boundary grid, s = q/p.
CarlesonReport carleson_pq(const Measure& nu, const RadialWeight& w, double p, double q, double r,
                           const CarlesonSettings& settings = {});

/// Integral (iii) and lattice (iv) criteria for q < p; bounded and compact coincide.
CarlesonReport carleson_qp(const Measure& nu, const RadialWeight& w, double p, double q, double r, const Lattice& lattice,
                           const CarlesonSettings& settings = {});

struct SymbolConfig {
    int n = 1;
    double p = 2.0;
    double q = 2.0;
    RadialWeight omega;
    MeasurePtr mu;
    SymbolMap phi;
    SymbolMap psi;
    WeightFactor u;
    WeightFactor v;
    double r = 0.5;  // pseudohyperbolic radius of G_r and Bergman radius of the averaging balls, in (0, 1)
    CarlesonSettings carleson{};
    PolarSettings polar{};
};

/// Throws std::domain_error on inconsistent dimensions or parameters.
void validate(const SymbolConfig& cfg);

struct BatteryRatio {
    std::string label;
    double image_norm = 0.0;  // ||(uC_phi - vC_psi) f||_{L^q_mu}
    double image_se = 0.0;
    double norm = 0.0;  // ||f||_{A^p_omega}
    double norm_se = 0.0;
    double ratio = 0.0;
    double ratio_se = 0.0;
    bool boundary_kernel = false;
    double center_radius = 0.0;
};

struct OperatorReport {
    std::string regime;
    CarlesonReport two_sided;  // eta + sigma_r
    CarlesonReport phi_sided;  // eta + sigma_{phi,r}
    CarlesonReport psi_sided;  // eta + sigma_{psi,r}
    Verdict bounded = Verdict::Inconclusive;
    Verdict vanishing = Verdict::Inconclusive;
    bool one_sided_agree = true;
    std::string battery_version;
    std::vector<BatteryRatio> battery;
    double battery_lower_bound = 0.0;
    double battery_lower_bound_se = 0.0;
    TrendFit kernel_trend;        // battery ratios of the normalized kernels against |a|
    bool kernel_diverging = false;
    bool consistent = true;       // bounded criterion never meets a diverging kernel subfamily
    std::vector<std::string> warnings;
};

OperatorReport operator_check(const SymbolConfig& cfg);

struct ProbeReport {
    std::vector<double> radii;
    std::vector<double> values;  // ||(uC_phi - vC_psi) f_{a_k}||_{L^q_mu}
    std::vector<double> se;
    std::size_t used = 0;        // leading entries kept before SE dominance truncates
    TrendFit trend;
    std::string verdict;  // "consistent with compactness", "refutes compactness" or "inconclusive"
    std::vector<std::string> warnings;
};

/// Normalized kernels at the given centers; centers must approach the boundary.
ProbeReport compactness_probe(const SymbolConfig& cfg, const std::vector<Point>& centers);

/// Centers (1 - 2^-k) e_1, k = 1 .. depth.
std::vector<Point> radial_centers(int n, int depth);

struct AuditRow {
    double t = 0.0;
    double numerator = 0.0;  // mu(D(t e_1, R)), mu = eta_{phi,u} + sigma_{phi,r}
    double numerator_se = 0.0;
    double denominator = 0.0;  // sum over J_N(t e_1) of R_{s,r,q}(t e_1, b)
    double denominator_se = 0.0;
    double ratio = 0.0;
    double rejected_fraction = 0.0;
};

struct AuditReport {
    double s = 0.0;
    double R = 0.0;
    double N = 0.0;
    double t0 = 0.9;
    std::vector<AuditRow> rows;
    std::vector<AuditRow> doubled;  // same grid at twice the budget, fresh seeds
    double C = 0.0;
    double C_doubled = 0.0;
    double drift = 0.0;  // |C_doubled - C| / C, 0 when both vanish
    bool violation = false;
    std::vector<std::string> warnings;
};

/// When `ts` is empty the grid is t = 1 - 2^-k for five consecutive k, starting at
/// max(4, floor(6 log2 N) + 1). Every t must exceed t0.
AuditReport audit_lemma_4_2(const SymbolConfig& cfg, double s, double R, double N, std::vector<double> ts = {},
                            double t0 = 0.9, const McSettings& mc = {4096, 1, 512});

}  // namespace bcl
