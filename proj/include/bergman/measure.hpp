#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/gauss_legendre.hpp"
#include "bergman/types.hpp"

namespace bergman {

struct Point {
    double re = 0.0;
    double im = 0.0;
    Index index = 0;

    [[nodiscard]] cplx z() const noexcept { return {re, im}; }
};

enum class MeasureKind { discrete, disk_product };

inline const char* to_string(MeasureKind kind) {
    return kind == MeasureKind::discrete ? "discrete" : "disk";
}

/// Layout of a polar product rule: node index = radial * n_angular + angular.
struct DiskLayout {
    double radius = 1.0;
    int n_radial = 1;
    int n_angular = 1;
    std::vector<double> radii;  // ascending
};

/// A finite positive measure: points in the plane with strictly positive masses.
/// Immutable once built.
class QuadratureMeasure {
public:
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(points_.size()); }
    [[nodiscard]] const std::vector<Point>& points() const noexcept { return points_; }
    [[nodiscard]] const Point& point(Index i) const { return points_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] cplx z(Index i) const { return point(i).z(); }
    [[nodiscard]] const RVector& masses() const noexcept { return masses_; }
    [[nodiscard]] double mass(Index i) const { return masses_(i); }
    [[nodiscard]] double total_mass() const { return masses_.sum(); }
    [[nodiscard]] MeasureKind kind() const noexcept { return kind_; }

    /// Highest total degree a+b for which z^a conj(z)^b integrates exactly. Disk rules only.
    [[nodiscard]] std::optional<int> exactness_degree() const noexcept { return exactness_; }
    [[nodiscard]] const std::optional<DiskLayout>& disk() const noexcept { return disk_; }

    /// Sum of mass * z^a * conj(z)^b over the nodes.
    [[nodiscard]] cplx moment(int a, int b) const {
        cplx acc = 0.0;
        for (Index i = 0; i < size(); ++i) {
            const cplx zi = z(i);
            cplx term = masses_(i);
            for (int k = 0; k < a; ++k) term *= zi;
            for (int k = 0; k < b; ++k) term *= std::conj(zi);
            acc += term;
        }
        return acc;
    }

private:
    friend QuadratureMeasure build_discrete_measure(std::span<const cplx>, std::span<const double>);
    friend QuadratureMeasure build_disk_measure(double, int, int);

    std::vector<Point> points_;
    RVector masses_;
    MeasureKind kind_ = MeasureKind::discrete;
    std::optional<int> exactness_;
    std::optional<DiskLayout> disk_;
};

inline QuadratureMeasure build_discrete_measure(std::span<const cplx> points, std::span<const double> masses) {
    if (points.empty()) throw invalid_measure("discrete measure needs at least one point");
    if (points.size() != masses.size())
        throw invalid_measure("discrete measure: " + std::to_string(points.size()) + " points but " +
                              std::to_string(masses.size()) + " masses");
    QuadratureMeasure mu;
    mu.points_.reserve(points.size());
    mu.masses_.resize(static_cast<Index>(masses.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].real()) || !std::isfinite(points[i].imag()))
            throw invalid_measure("discrete measure: point " + std::to_string(i) + " is not finite");
        if (!(masses[i] > 0.0) || !std::isfinite(masses[i]))
            throw invalid_measure("discrete measure: mass " + std::to_string(i) + " must be finite and > 0");
        mu.points_.push_back({points[i].real(), points[i].imag(), static_cast<Index>(i)});
        mu.masses_(static_cast<Index>(i)) = masses[i];
    }
    mu.kind_ = MeasureKind::discrete;
    return mu;
}

/// Product rule on the disk |z| <= radius: Gauss-Legendre in s = r^2 on [0, R^2]
/// times equispaced angles. Monomial moments are exact up to total degree
/// min(4 n_radial - 1, n_angular - 1).
inline QuadratureMeasure build_disk_measure(double radius, int n_radial, int n_angular) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw invalid_measure("disk measure: radius must be > 0");
    if (n_radial < 1 || n_angular < 1) throw invalid_measure("disk measure: n_radial and n_angular must be >= 1");

    const GaussRule gl = gauss_legendre(n_radial);
    const double r2 = radius * radius;
    const double dtheta = 2.0 * std::numbers::pi / n_angular;

    QuadratureMeasure mu;
    DiskLayout layout{radius, n_radial, n_angular, {}};
    const Index m = static_cast<Index>(n_radial) * n_angular;
    mu.points_.reserve(static_cast<std::size_t>(m));
    mu.masses_.resize(m);
    Index idx = 0;
    for (int i = 0; i < n_radial; ++i) {
        const double s = 0.5 * r2 * (gl.nodes[i] + 1.0);
        const double r = std::sqrt(s);
        // dA = r dr dtheta = (1/2) ds dtheta
        const double w = 0.5 * (0.5 * r2 * gl.weights[i]) * dtheta;
        layout.radii.push_back(r);
        for (int j = 0; j < n_angular; ++j) {
            const double theta = j * dtheta;
            mu.points_.push_back({r * std::cos(theta), r * std::sin(theta), idx});
            mu.masses_(idx) = w;
            ++idx;
        }
    }
    mu.kind_ = MeasureKind::disk_product;
    mu.exactness_ = std::min(4 * n_radial - 1, n_angular - 1);
    mu.disk_ = std::move(layout);
    return mu;
}

} // namespace bergman
