#pragma once

// Positive Borel measures on the ball as expression trees, pullbacks under
// self-maps, and the composite measures built from a pair of symbols.

#include "bcl/geometry.hpp"
#include "bcl/parallel.hpp"
#include "bcl/weights.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bcl {

using RealField = std::function<double(const Point&)>;
using ComplexField = std::function<std::complex<double>(const Point&)>;
using Region = std::function<bool(const Point&)>;

class SymbolMap;

namespace symbol {
struct Identity {};
struct Dilation {
    std::complex<double> lambda;
};
struct Affine {
    Eigen::MatrixXcd A;
    Point b;
};
/// z -> U phi_a(z).
struct Automorphism {
    Point a;
    Eigen::MatrixXcd U;
};
/// Applied left to right: maps.front() acts first.
struct Composite {
    std::vector<SymbolMap> maps;
};
}  // namespace symbol

/// A holomorphic self-map of B_n. Construction samples the ball and rejects
/// maps whose image leaves the closed ball.
class SymbolMap {
public:
    using Variant = std::variant<symbol::Identity, symbol::Dilation, symbol::Affine, symbol::Automorphism, symbol::Composite>;

    SymbolMap(Variant v, int n);

    static SymbolMap identity(int n) { return SymbolMap(symbol::Identity{}, n); }
    static SymbolMap dilation(int n, std::complex<double> lambda) { return SymbolMap(symbol::Dilation{lambda}, n); }

    Point operator()(const Point& z) const;

    /// Real Jacobian determinant |det h'(z)|^2 of the map as a map of R^{2n}.
    double jacobian(const Point& z) const;

    /// Preimage of w when the map is injective with a known inverse; the result may lie outside the ball.
    std::optional<Point> inverse(const Point& w) const;
    bool invertible() const { return invertible_; }

    /// Empirical sup |h(z)| over the certification sample.
    double sup_certificate() const { return sup_; }

    int dimension() const { return n_; }
    const Variant& variant() const { return v_; }
    std::string describe() const;

private:
    Variant v_;
    int n_;
    bool invertible_ = false;
    double sup_ = 0.0;
    Eigen::MatrixXcd inverse_linear_;  // Affine only
};

/// A Borel weight u on the ball with an empirical sup certificate.
class WeightFactor {
public:
    WeightFactor(ComplexField f, int n, std::string description);

    static WeightFactor constant(int n, std::complex<double> c);

    std::complex<double> operator()(const Point& z) const { return f_(z); }
    double sup_certificate() const { return sup_; }
    /// Constant factors are recognized so that u - v = 0 is exact.
    std::optional<std::complex<double>> constant_value() const { return constant_; }
    const std::string& describe() const { return description_; }

private:
    ComplexField f_;
    std::string description_;
    double sup_ = 0.0;
    std::optional<std::complex<double>> constant_;
};

class Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

namespace measure {
/// g dV with respect to normalized volume.
struct Density {
    RealField g;
    std::string label;
};
/// E -> int_{h^{-1}(E)} factor dbase.
struct Pushforward {
    MeasurePtr base;
    SymbolMap map;
    RealField factor;
    std::string label;
};
struct Restriction {
    MeasurePtr base;
    Region region;
    std::string label;
};
struct Sum {
    std::vector<MeasurePtr> parts;
};
}  // namespace measure

/// One summand of a flattened measure: f -> int f(map(z)) weight(z) density(z) dV(z).
struct MeasureTerm {
    RealField density;
    SymbolMap map;
    RealField weight;  // empty means 1
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    bool flagged = false;       // se above the requested relative tolerance
    double rejected_fraction = 0.0;
};

class Measure {
public:
    using Variant = std::variant<measure::Density, measure::Pushforward, measure::Restriction, measure::Sum>;

    static MeasurePtr density(int n, RealField g, std::string label);
    static MeasurePtr weighted(const RadialWeight& w, RealField factor = {}, std::string label = {});
    static MeasurePtr zero(int n);
    static MeasurePtr pushforward(MeasurePtr base, SymbolMap map, RealField factor = {}, std::string label = {});
    static MeasurePtr restriction(MeasurePtr base, Region region, std::string label);
    static MeasurePtr sum(std::vector<MeasurePtr> parts);

    const Variant& variant() const { return v_; }
    int dimension() const { return n_; }
    const std::vector<MeasureTerm>& terms() const { return terms_; }

    /// Total mass estimated at construction (uniform-ball Monte Carlo, fixed seed).
    const Estimate& total_mass() const { return mass_; }
    std::string describe() const;

    Measure(Variant v, int n);

private:
    Variant v_;
    int n_;
    std::vector<MeasureTerm> terms_;
    Estimate mass_;

    std::vector<MeasureTerm> flatten() const;
};

/// int f dmu by seeded Monte Carlo over the ball; pushforwards compose through the forward map.
Estimate integrate(const Measure& mu, const RealField& f, const McSettings& mc = {}, double target_rel_se = 0.05);

/// mu(D(a, r)). Terms whose map has a known inverse draw from the preimage of the
/// ellipsoid; the others fall back to uniform samples of the ball.
Estimate measure_of_ball(const Measure& mu, const Point& a, double r, const McSettings& mc = {},
                         double target_rel_se = 0.05);

struct MeanValue {
    double value = 0.0;
    double se = 0.0;
    double numerator = 0.0;    // mu(D(a, r))
    double denominator = 0.0;  // omega(D(a, r))
    bool flagged = false;
};

/// mu(D(a,r)) / omega(D(a,r))^s. Numerator and denominator share every sample, so
/// mu = c omega dV gives exactly c for s = 1.
MeanValue mean_function(const Measure& mu, const RadialWeight& w, double r, double s, const Point& a,
                        const McSettings& mc = {}, double target_rel_se = 0.05);

struct MeanProfile {
    std::vector<Point> centers;  // sorted by |a|
    std::vector<MeanValue> values;
    double r = 0.0;
    double s = 0.0;
};

/// Centers |a| = 1 - 2^-k (k = 1 .. depth) along each direction, plus the origin.
std::vector<Point> boundary_grid(int n, int depth, int directions);

MeanProfile mean_profile(const Measure& mu, const RadialWeight& w, double r, double s, std::vector<Point> centers,
                         const McSettings& mc = {});

/// The two one-sided pullbacks and their sum.
struct CompositeMeasure {
    MeasurePtr total;
    MeasurePtr phi_part;
    MeasurePtr psi_part;
};

/// rho(z) = rho(phi(z), psi(z)).
double symbol_distance(const SymbolMap& phi, const SymbolMap& psi, const Point& z);

/// eta = (|rho u|^q dmu) o phi^{-1} + (|rho v|^q dmu) o psi^{-1}.
CompositeMeasure build_eta(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                           const MeasurePtr& mu, double q);

/// sigma_r = (chi_{G_r} |u-v|^q dmu) o phi^{-1} + (same) o psi^{-1}, G_r = {rho < r}, r in (0, 1).
CompositeMeasure build_sigma(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                             const MeasurePtr& mu, double q, double r);

/// int_{phi^{-1}(D(a, r))} |u - v Q_b^s|^q dmu with Q_b = (1 - <phi, b>) / (1 - <psi, b>).
/// Samples with |1 - <psi(z), b>| < 1e-14 are dropped and counted.
Estimate R_quantity(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                    const MeasurePtr& mu, double s, double r, double q, const Point& a, const Point& b,
                    const McSettings& mc = {});

}  // namespace bcl
