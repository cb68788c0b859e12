#pragma once

// Möbius geometry of the complex unit ball B_n.
//
// Points are dense complex column vectors. Every routine is templated on the
// real scalar so the same code serves double and long double evaluation.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace bcl {

template <typename Scalar>
using PointT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Point = PointT<double>;

/// Points closer than this to the unit sphere are rejected as non-interior.
inline constexpr double kInteriorMargin = 1e-12;
/// Tolerance for |xi| = 1 on boundary points.
inline constexpr double kBoundaryTolerance = 1e-12;
/// Width of the band around beta(z,w) = r in which ellipsoid and metric
/// membership tests are allowed to disagree.
inline constexpr double kMembershipBand = 1e-9;

/// <z, w> = sum z_i conj(w_i).
template <typename Scalar>
std::complex<Scalar> inner(const PointT<Scalar>& z, const PointT<Scalar>& w)
{
    // Eigen's dot conjugates its left operand.
    return w.dot(z);
}

template <typename Scalar>
bool is_interior(const PointT<Scalar>& z)
{
    return z.norm() < Scalar(1) - Scalar(kInteriorMargin);
}

template <typename Scalar>
void require_interior(const PointT<Scalar>& z, const char* what)
{
    if (!is_interior(z)) {
        throw std::domain_error(std::string(what) + ": point is not interior to the unit ball (|z| = " +
                                std::to_string(static_cast<double>(z.norm())) + ")");
    }
}

template <typename Scalar>
void require_same_dimension(const PointT<Scalar>& a, const PointT<Scalar>& b, const char* what)
{
    if (a.size() != b.size() || a.size() == 0) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}

/// A point of the unit sphere, validated on construction.
template <typename Scalar>
class BoundaryPointT {
public:
    explicit BoundaryPointT(PointT<Scalar> coords) : coords_(std::move(coords))
    {
        if (coords_.size() == 0 || std::abs(coords_.norm() - Scalar(1)) > Scalar(kBoundaryTolerance)) {
            throw std::domain_error("BoundaryPoint: |xi| must equal 1");
        }
    }

    /// Normalizes a nonzero vector onto the sphere.
    static BoundaryPointT direction_of(const PointT<Scalar>& z)
    {
        const Scalar len = z.norm();
        if (len == Scalar(0)) {
            throw std::domain_error("BoundaryPoint: zero vector has no direction");
        }
        return BoundaryPointT(z / len);
    }

    const PointT<Scalar>& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }

private:
    PointT<Scalar> coords_;
};

using BoundaryPoint = BoundaryPointT<double>;

/// Orthogonal projections onto [z] and its complement. P_0 = 0, Q_0 = identity.
template <typename Scalar>
std::pair<PointT<Scalar>, PointT<Scalar>> projections(const PointT<Scalar>& z, const PointT<Scalar>& w)
{
    require_same_dimension(z, w, "projections");
    const Scalar zz = z.squaredNorm();
    if (zz == Scalar(0)) {
        return {PointT<Scalar>::Zero(w.size()), w};
    }
    PointT<Scalar> p = (inner(w, z) / zz) * z;
    PointT<Scalar> q = w - p;
    return {std::move(p), std::move(q)};
}

/// The involutive automorphism phi_a exchanging 0 and a.
template <typename Scalar>
PointT<Scalar> mobius_transform(const PointT<Scalar>& a, const PointT<Scalar>& z)
{
    require_same_dimension(a, z, "mobius_transform");
    require_interior(a, "mobius_transform");
    require_interior(z, "mobius_transform");
    const Scalar aa = a.squaredNorm();
    if (aa == Scalar(0)) {
        return -z;
    }
    const std::complex<Scalar> za = inner(z, a);
    PointT<Scalar> p = (za / aa) * a;
    PointT<Scalar> q = z - p;
    const Scalar sa = std::sqrt(Scalar(1) - aa);
    return (a - p - sa * q) / (std::complex<Scalar>(1) - za);
}

/// 1 - rho(a,z)^2 = (1-|a|^2)(1-|z|^2)/|1-<z,a>|^2, free of cancellation near the boundary.
template <typename Scalar>
Scalar one_minus_rho_squared(const PointT<Scalar>& a, const PointT<Scalar>& z)
{
    const Scalar d = std::norm(std::complex<Scalar>(1) - inner(z, a));
    return (Scalar(1) - a.squaredNorm()) * (Scalar(1) - z.squaredNorm()) / d;
}

/// rho(a,z) = |phi_a(z)|.
template <typename Scalar>
Scalar pseudo_distance(const PointT<Scalar>& a, const PointT<Scalar>& z)
{
    const Scalar rho = mobius_transform(a, z).norm();
    return rho < Scalar(1) ? rho : Scalar(1) - Scalar(kInteriorMargin);
}

/// Bergman metric beta = atanh(rho).
template <typename Scalar>
Scalar bergman_distance(const PointT<Scalar>& z, const PointT<Scalar>& w)
{
    const Scalar rho = pseudo_distance(z, w);
    if (rho < Scalar(0.5)) {
        return std::atanh(rho);
    }
    // 1/2 log((1+rho)^2 / (1-rho^2)) keeps full relative accuracy as rho -> 1.
    const Scalar omr2 = one_minus_rho_squared(z, w);
    return Scalar(0.5) * std::log((Scalar(1) + rho) * (Scalar(1) + rho) / omr2);
}

/// Unitary matrix whose first column is z/|z| (identity for z = 0).
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> frame_for(const PointT<Scalar>& z)
{
    using Matrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = z.size();
    const Scalar zn = z.norm();
    if (zn == Scalar(0)) {
        return Matrix::Identity(n, n);
    }
    Matrix basis(n, n);
    basis.col(0) = z / zn;
    Eigen::Index filled = 1;
    // Gram-Schmidt against the standard basis, starting from the axis least aligned with z.
    for (Eigen::Index e = 0; e < n && filled < n; ++e) {
        PointT<Scalar> v = PointT<Scalar>::Zero(n);
        v(e) = Scalar(1);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < filled; ++k) {
                v -= basis.col(k).dot(v) * basis.col(k);
            }
        }
        const Scalar len = v.norm();
        if (len > Scalar(1e-6)) {
            basis.col(filled++) = v / len;
        }
    }
    return basis;
}

/// Center, axes and frame of the Bergman ball D(z, r) viewed as an ellipsoid.
template <typename Scalar>
struct EllipsoidParamsT {
    PointT<Scalar> z;  // generating center
    Scalar R;          // tanh(r)
    PointT<Scalar> c;  // Euclidean center
    Scalar s;
    Scalar axis_long;   // s R, along [z]
    Scalar axis_short;  // sqrt(s) R, across [z]
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> frame;  // first column spans [z]

    /// Normalized volume: (sR)^2 (sqrt(s) R)^{2(n-1)}.
    Scalar volume() const
    {
        const auto n = static_cast<int>(z.size());
        return std::pow(s, Scalar(n + 1)) * std::pow(R, Scalar(2 * n));
    }

    /// Left side of the ellipsoid inequality; < 1 inside.
    Scalar quadratic_form(const PointT<Scalar>& w) const
    {
        const PointT<Scalar> v = frame.adjoint() * (w - c);
        const Scalar along = std::norm(v(0));
        const Scalar across = v.squaredNorm() - along;
        return along / (axis_long * axis_long) + across / (axis_short * axis_short);
    }

    bool contains(const PointT<Scalar>& w) const { return quadratic_form(w) < Scalar(1); }

    /// Affine image of a point of the unit ball of C^n onto the ellipsoid: the
    /// first coordinate of `unit` runs along [z], the rest span [z]^perp.
    PointT<Scalar> map_from_unit_ball(const PointT<Scalar>& unit) const
    {
        PointT<Scalar> scaled = axis_short * unit;
        scaled(0) = axis_long * unit(0);
        return c + frame * scaled;
    }
};

using EllipsoidParams = EllipsoidParamsT<double>;

template <typename Scalar>
EllipsoidParamsT<Scalar> bergman_ball(const PointT<Scalar>& z, Scalar r)
{
    require_interior(z, "bergman_ball");
    if (!(r > Scalar(0)) || !std::isfinite(r)) {
        throw std::domain_error("bergman_ball: radius must be positive and finite");
    }
    EllipsoidParamsT<Scalar> e;
    e.z = z;
    e.R = std::tanh(r);
    const Scalar R2 = e.R * e.R;
    const Scalar zz = z.squaredNorm();
    const Scalar denom = Scalar(1) - R2 * zz;
    e.c = ((Scalar(1) - R2) / denom) * z;
    e.s = (Scalar(1) - zz) / denom;
    e.axis_long = e.s * e.R;
    e.axis_short = std::sqrt(e.s) * e.R;
    e.frame = frame_for(z);
    return e;
}

/// Membership in the Carleson tube S(xi, delta) = {z : |1 - <z,xi>| < delta}.
template <typename Scalar>
bool carleson_tube_contains(const BoundaryPointT<Scalar>& xi, Scalar delta, const PointT<Scalar>& z)
{
    if (!(delta > Scalar(0))) {
        throw std::domain_error("carleson_tube_contains: delta must be positive");
    }
    require_same_dimension(xi.coords(), z, "carleson_tube_contains");
    return std::abs(std::complex<Scalar>(1) - inner(z, xi.coords())) < delta;
}

/// Width of the tube that contains D(t e_1, r): 2(1-t)/(1 - atanh r).
/// Only meaningful when atanh(r) < 1.
template <typename Scalar>
Scalar tube_width_for_ball(Scalar t, Scalar r)
{
    const Scalar d = Scalar(1) - std::atanh(r);
    if (!(d > Scalar(0))) {
        throw std::domain_error("tube_width_for_ball: requires atanh(r) < 1");
    }
    return Scalar(2) * (Scalar(1) - t) / d;
}

}  // namespace bcl
