#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/kernel.hpp"
#include "bergman/measure.hpp"
#include "bergman/span.hpp"
#include "bergman/types.hpp"
#include "bergman/weight.hpp"

namespace bergman {

enum class DensitySource { analytic, finite_difference };

inline const char* to_string(DensitySource s) { return s == DensitySource::analytic ? "analytic" : "finite-difference"; }

/// Target density Lap(phi) / (4 pi). With this normalization the Fock weight
/// k |z|^2 gives k^{-1} B = 1/pi = Lap(|z|^2) / (4 pi).
struct MongeAmpereDensity {
    RVector values;
    DensitySource source = DensitySource::analytic;
};

namespace detail {

// Second and first derivative at x[1] from samples at three distinct abscissae.
inline std::pair<double, double> three_point_derivatives(const double (&x)[3], const double (&f)[3], double at) {
    const double d01 = x[0] - x[1], d02 = x[0] - x[2], d12 = x[1] - x[2];
    const double l0 = 1.0 / (d01 * d02), l1 = 1.0 / (-d01 * d12), l2 = 1.0 / (d02 * d12);
    const double second = 2.0 * (f[0] * l0 + f[1] * l1 + f[2] * l2);
    const double first = f[0] * l0 * ((at - x[1]) + (at - x[2])) + f[1] * l1 * ((at - x[0]) + (at - x[2])) +
                         f[2] * l2 * ((at - x[0]) + (at - x[1]));
    return {second, first};
}

// Laplacian of values tabulated on a polar product grid.
inline RVector polar_grid_laplacian(const RVector& phi, const DiskLayout& g) {
    if (g.n_radial < 3 || g.n_angular < 3)
        throw unsupported("finite-difference Laplacian needs at least 3 radial and 3 angular nodes");
    const int nr = g.n_radial, na = g.n_angular;
    const double dtheta = 2.0 * std::numbers::pi / na;
    RVector lap(phi.size());
    for (int i = 0; i < nr; ++i) {
        const int c = std::clamp(i, 1, nr - 2);  // centre of the radial stencil
        const double r[3] = {g.radii[c - 1], g.radii[c], g.radii[c + 1]};
        for (int j = 0; j < na; ++j) {
            const auto at = [&](int ii, int jj) { return phi(Index(ii) * na + ((jj % na) + na) % na); };
            const double f[3] = {at(c - 1, j), at(c, j), at(c + 1, j)};
            const auto [frr, fr] = three_point_derivatives(r, f, g.radii[i]);
            const double ftt = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (dtheta * dtheta);
            const double ri = g.radii[i];
            lap(Index(i) * na + j) = frr + fr / ri + ftt / (ri * ri);
        }
    }
    return lap;
}

} // namespace detail

/// Lap(phi)/(4 pi) at every node: analytic when the weight has a closed form,
/// otherwise finite differences on the polar grid of a disk rule.
inline MongeAmpereDensity ma_density(const WeightFunction& weight, const QuadratureMeasure& measure) {
    MongeAmpereDensity out;
    out.values.resize(measure.size());
    if (weight.has_laplacian()) {
        for (Index j = 0; j < measure.size(); ++j) out.values(j) = weight.laplacian_at(measure.z(j)) / (4.0 * std::numbers::pi);
        return out;
    }
    if (measure.kind() != MeasureKind::disk_product || !measure.disk())
        throw unsupported("Monge-Ampere density of a tabulated-only weight needs a disk product rule");
    if (weight.size() != measure.size()) throw dimension_mismatch("ma_density: weight and measure sizes differ");
    out.values = detail::polar_grid_laplacian(weight.values(), *measure.disk()) / (4.0 * std::numbers::pi);
    out.source = DensitySource::finite_difference;
    return out;
}

/// Five-point stencil of step h around every node, from the closed form.
inline MongeAmpereDensity ma_density_stencil(const WeightFamily& family, const QuadratureMeasure& measure, double h) {
    MongeAmpereDensity out{RVector(measure.size()), DensitySource::finite_difference};
    for (Index j = 0; j < measure.size(); ++j) {
        const cplx z = measure.z(j);
        const double lap = (evaluate(family, z + h) + evaluate(family, z - h) + evaluate(family, z + cplx(0, h)) +
                            evaluate(family, z - cplx(0, h)) - 4.0 * evaluate(family, z)) /
                           (h * h);
        out.values(j) = lap / (4.0 * std::numbers::pi);
    }
    return out;
}

namespace detail {

inline void require_scalable(const QuadratureMeasure& measure, int degree) {
    if (degree < 0) throw invalid_configuration("scaled_bergman: degree must be >= 0");
    if (measure.kind() != MeasureKind::disk_product || !measure.exactness_degree())
        throw invalid_configuration("scaled_bergman: needs a disk product rule");
    if (*measure.exactness_degree() < 2 * degree)
        throw invalid_configuration("scaled_bergman: quadrature exactness " + std::to_string(*measure.exactness_degree()) +
                                    " < 2 * degree " + std::to_string(2 * degree));
}

} // namespace detail

/// B_{k phi} at the listed nodes, monomial span 1, z, ..., z^degree.
inline BergmanDensity scaled_bergman(const WeightFunction& phi, double k, int degree, const QuadratureMeasure& measure,
                                     const std::vector<Index>& nodes) {
    detail::require_scalable(measure, degree);
    const SpanFrame frame(FunctionSpan::monomials(degree), measure);
    const WeightedSpace space(frame, eval_weight(phi, measure).scaled(k));
    RVector kd = kernel_diagonal(space, nodes);
    for (std::size_t i = 0; i < nodes.size(); ++i) kd(Index(i)) *= std::exp(-space.weight()(nodes[i]));
    return {kd};
}

inline BergmanDensity scaled_bergman(const WeightFunction& phi, double k, int degree, const QuadratureMeasure& measure) {
    std::vector<Index> all(static_cast<std::size_t>(measure.size()));
    for (Index j = 0; j < measure.size(); ++j) all[static_cast<std::size_t>(j)] = j;
    return scaled_bergman(phi, k, degree, measure, all);
}

/// Maps k to a truncation degree for a given measure.
using DegreeRule = std::function<int(double k, const QuadratureMeasure&)>;

/// ceil(factor * k * R^2), capped so that the Gram matrix stays exact in the rule.
inline DegreeRule proportional_degree_rule(double factor = 1.5) {
    return [factor](double k, const QuadratureMeasure& mu) {
        const double r = mu.disk() ? mu.disk()->radius : 1.0;
        const int wanted = static_cast<int>(std::ceil(factor * k * r * r));
        const int cap = mu.exactness_degree() ? *mu.exactness_degree() / 2 : wanted;
        return std::max(0, std::min(wanted, cap));
    };
}

struct ScalingReport {
    double k = 0.0;
    int degree = 0;
    std::vector<Index> eval_points;
    RVector bergman;  // raw B_{k phi} at the eval points
    RVector ratios;   // k^{-1} B / (Lap phi / 4 pi)
    double max_abs_dev_from_1 = 0.0;
    double mean_abs_dev = 0.0;
    std::vector<Index> skipped;  // interior nodes with Lap phi <= 0
};

/// k^{-1} B_{k phi} against Lap(phi)/(4 pi) on interior nodes, for each k.
inline std::vector<ScalingReport> tcz_convergence_report(const WeightFunction& phi, std::span<const double> k_list,
                                                         const DegreeRule& degree_rule, const QuadratureMeasure& measure,
                                                         double interior_radius) {
    if (measure.kind() != MeasureKind::disk_product) throw invalid_configuration("tcz: needs a disk product rule");
    const MongeAmpereDensity target = ma_density(eval_weight(phi, measure), measure);

    std::vector<Index> interior;
    std::vector<Index> skipped;
    for (Index j = 0; j < measure.size(); ++j) {
        if (std::abs(measure.z(j)) > interior_radius) continue;
        (target.values(j) > 0.0 ? interior : skipped).push_back(j);
    }

    std::vector<int> degrees;
    int max_degree = 0;
    for (const double k : k_list) {
        degrees.push_back(degree_rule(k, measure));
        detail::require_scalable(measure, degrees.back());
        max_degree = std::max(max_degree, degrees.back());
    }
    const FunctionSpan top = FunctionSpan::monomials(max_degree);
    const CMatrix unit_gram =
        detail::weighted_gram(measure, nullptr, top.dim(), [&](Index b, Index c) { return top.values(measure, b, c); });
    const WeightFunction base = eval_weight(phi, measure);

    std::vector<ScalingReport> out;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        const double k = k_list[i];
        ScalingReport rep;
        rep.k = k;
        rep.degree = degrees[i];
        rep.eval_points = interior;
        rep.skipped = skipped;
        const SpanFrame frame(FunctionSpan::monomials(rep.degree), measure, unit_gram, default_rank_tol);
        const WeightedSpace space(frame, base.scaled(k));
        const RVector kd = kernel_diagonal(space, interior);
        rep.bergman.resize(kd.size());
        rep.ratios.resize(kd.size());
        double sum = 0.0;
        for (Index p = 0; p < kd.size(); ++p) {
            const Index j = interior[static_cast<std::size_t>(p)];
            rep.bergman(p) = kd(p) * std::exp(-space.weight()(j));
            rep.ratios(p) = rep.bergman(p) / k / target.values(j);
            const double dev = std::abs(rep.ratios(p) - 1.0);
            rep.max_abs_dev_from_1 = std::max(rep.max_abs_dev_from_1, dev);
            sum += dev;
        }
        rep.mean_abs_dev = kd.size() ? sum / double(kd.size()) : 0.0;
        out.push_back(std::move(rep));
    }
    return out;
}

/// Deviation nonincreasing along the ladder, allowing each step to grow by `slack` (relative).
inline bool deviations_nonincreasing(std::span<const ScalingReport> reports, double slack = 0.1) {
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].max_abs_dev_from_1 > (1.0 + slack) * reports[i - 1].max_abs_dev_from_1) return false;
    return true;
}

} // namespace bergman
