#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bergman/comparison.hpp"
#include "bergman/error.hpp"
#include "bergman/kernel.hpp"
#include "bergman/types.hpp"
#include "bergman/weight.hpp"

namespace bergman {

inline constexpr double default_fd_step = 1e-3;

inline std::vector<double> default_t_grid(int points = 11) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = points == 1 ? 0.0 : double(i) / (points - 1);
    return grid;
}

/// phi_t = phi + t u with u = psi - phi, so phi_0 = phi and phi_1 = psi.
class HomotopyPath {
public:
    HomotopyPath(const WeightFunction& phi, const WeightFunction& psi, std::vector<double> t_grid = default_t_grid())
        : base_(phi.values()), direction_(psi.values() - phi.values()), t_grid_(std::move(t_grid)) {
        if (phi.size() != psi.size()) throw dimension_mismatch("homotopy: weights tabulated on different node sets");
        u_sup_ = direction_.size() ? direction_.cwiseAbs().maxCoeff() : 0.0;
        if (!std::isfinite(u_sup_)) throw invalid_weight("homotopy: direction is not bounded");
        if (!std::is_sorted(t_grid_.begin(), t_grid_.end())) throw invalid_configuration("homotopy: t grid must be ordered");
    }

    [[nodiscard]] const RVector& base() const noexcept { return base_; }
    [[nodiscard]] const RVector& direction() const noexcept { return direction_; }
    [[nodiscard]] double u_sup() const noexcept { return u_sup_; }
    [[nodiscard]] const std::vector<double>& t_grid() const noexcept { return t_grid_; }

    [[nodiscard]] WeightFunction weight_at(double t) const { return WeightFunction(RVector(base_ + t * direction_)); }

    /// rho = 1 where u < 0, i.e. on {psi < phi}.
    [[nodiscard]] RVector negative_indicator() const {
        return (direction_.array() < 0.0).cast<double>().matrix();
    }

private:
    RVector base_;
    RVector direction_;
    double u_sup_ = 0.0;
    std::vector<double> t_grid_;
};

/// Nondecreasing piecewise-linear profile k(u), constant beyond the end knots.
struct IncreasingProfile {
    std::vector<double> knots;
    std::vector<double> values;

    [[nodiscard]] double operator()(double u) const {
        if (knots.empty()) return 0.0;
        if (u <= knots.front()) return values.front();
        if (u >= knots.back()) return values.back();
        const auto it = std::upper_bound(knots.begin(), knots.end(), u);
        const auto i = static_cast<std::size_t>(it - knots.begin());
        const double s = (u - knots[i - 1]) / (knots[i] - knots[i - 1]);
        return values[i - 1] + s * (values[i] - values[i - 1]);
    }
};

/// rho = k(u). Requires a nondecreasing profile.
inline RVector rho_from_profile(const HomotopyPath& path, const IncreasingProfile& k) {
    if (k.knots.size() != k.values.size() || k.knots.empty()) throw invalid_configuration("profile: knots/values mismatch");
    if (!std::is_sorted(k.knots.begin(), k.knots.end()) || !std::is_sorted(k.values.begin(), k.values.end()))
        throw invalid_configuration("profile must be nondecreasing");
    RVector rho(path.direction().size());
    for (Index j = 0; j < rho.size(); ++j) rho(j) = k(path.direction()(j));
    return rho;
}

/// A(u) = 2 u_sup e^{2 u_sup}: constant used for the difference-quotient and L2 bounds.
inline double bound_constant(double u_sup) { return 2.0 * u_sup * std::exp(2.0 * u_sup); }

/// G(t) = sum_j rho_j w_j B_{phi_t}(z_j)
inline double g_of_t(const HomotopyPath& path, const RVector& rho, double t, const SpanFrame& frame) {
    const WeightedSpace space(frame, path.weight_at(t));
    return frame.measure().masses().cwiseProduct(rho).dot(bergman_density(space).values);
}

/// dK_t/dt predicted by the derivative formula:
/// sum_k u_k K_t(z_i, z_k) K_t(z_k, z_j) w_k e^{-phi_t(z_k)}, for all (i, j).
inline CMatrix kernel_derivative_rhs(const HomotopyPath& path, const WeightedSpace& space_t) {
    const KernelMatrix k = kernel_matrix(space_t);
    const RVector d = path.direction().array() * space_t.measure().masses().array() *
                      (-space_t.weight().values().array()).exp();
    CMatrix out = k.values * d.asDiagonal() * k.values;
    detail::make_hermitian(out);
    return out;
}

inline cplx kernel_derivative_rhs(const HomotopyPath& path, const WeightedSpace& space_t, Index i, Index j) {
    if (space_t.rank() == 0) return 0.0;
    const CMatrix f = space_t.features();
    cplx acc = 0.0;
    for (Index k = 0; k < f.rows(); ++k) {
        const double d = path.direction()(k) * space_t.measure().mass(k) * std::exp(-space_t.weight()(k));
        acc += d * f.row(i).dot(f.row(k)) * f.row(k).dot(f.row(j));
    }
    // row.dot(other) conjugates the first argument: f_i . f_k = sum conj(f_i) f_k = conj(K_ik)
    return std::conj(acc);
}

/// (K_{t+tau} - K_{t-tau}) / (2 tau), entrywise.
inline CMatrix kernel_fd(const HomotopyPath& path, double t, double tau, const SpanFrame& frame) {
    if (tau == 0.0) throw precondition_error("kernel_fd: tau must be nonzero");
    const KernelMatrix kp = kernel_matrix(WeightedSpace(frame, path.weight_at(t + tau)));
    const KernelMatrix km = kernel_matrix(WeightedSpace(frame, path.weight_at(t - tau)));
    return (kp.values - km.values) / (2.0 * tau);
}

struct BoundCheck {
    double lhs = 0.0;
    double bound = 0.0;
    bool holds = true;
};

namespace detail {

inline void require_unit_step(double tau) {
    if (!(std::abs(tau) <= 1.0) || tau == 0.0) throw precondition_error("bound checks need 0 < |tau| <= 1");
}

// Kernel diagonal vanishing identically: the left side must vanish as well.
inline bool bound_holds(double lhs, double bound, double k_tt, double tol_scale) {
    const double slack = tol_scale * 1e-12 * (1.0 + k_tt);
    return lhs <= bound + slack;
}

} // namespace detail

/// |(K_{t+tau}(z_i,z_i) - K_t(z_i,z_i)) / tau| <= A(u) K_t(z_i,z_i), for every node.
inline std::vector<BoundCheck> difference_quotient_bounds(const HomotopyPath& path, double t, double tau,
                                                          const SpanFrame& frame, double tol_scale = 1.0) {
    detail::require_unit_step(tau);
    const RVector k0 = kernel_diagonal(WeightedSpace(frame, path.weight_at(t)));
    const RVector k1 = kernel_diagonal(WeightedSpace(frame, path.weight_at(t + tau)));
    const double a = bound_constant(path.u_sup());
    std::vector<BoundCheck> out(static_cast<std::size_t>(k0.size()));
    for (Index i = 0; i < k0.size(); ++i) {
        auto& c = out[static_cast<std::size_t>(i)];
        c.lhs = std::abs((k1(i) - k0(i)) / tau);
        c.bound = a * k0(i);
        c.holds = detail::bound_holds(c.lhs, c.bound, k0(i), tol_scale);
    }
    return out;
}

inline BoundCheck difference_quotient_bound_check(const HomotopyPath& path, double t, double tau, Index i,
                                                  const SpanFrame& frame, double tol_scale = 1.0) {
    return difference_quotient_bounds(path, t, tau, frame, tol_scale).at(static_cast<std::size_t>(i));
}

/// sum_k |K_{t+tau}(z_i,z_k) - K_t(z_i,z_k)|^2 w_k e^{-phi_t(z_k)} <= A(u) |tau| K_t(z_i,z_i), for every node.
inline std::vector<BoundCheck> l2_difference_bounds(const HomotopyPath& path, double t, double tau,
                                                    const SpanFrame& frame, double tol_scale = 1.0) {
    detail::require_unit_step(tau);
    const WeightedSpace s0(frame, path.weight_at(t));
    const KernelMatrix k0 = kernel_matrix(s0);
    const KernelMatrix k1 = kernel_matrix(WeightedSpace(frame, path.weight_at(t + tau)));
    const RVector w = frame.measure().masses().array() * (-s0.weight().values().array()).exp();
    const RVector lhs = (k1.values - k0.values).cwiseAbs2() * w;
    const double a = bound_constant(path.u_sup());
    std::vector<BoundCheck> out(static_cast<std::size_t>(lhs.size()));
    for (Index i = 0; i < lhs.size(); ++i) {
        auto& c = out[static_cast<std::size_t>(i)];
        const double kii = k0.values(i, i).real();
        c.lhs = lhs(i);
        c.bound = a * std::abs(tau) * kii;
        c.holds = detail::bound_holds(c.lhs, c.bound, kii, tol_scale);
    }
    return out;
}

inline BoundCheck l2_difference_bound_check(const HomotopyPath& path, double t, double tau, Index i,
                                            const SpanFrame& frame, double tol_scale = 1.0) {
    return l2_difference_bounds(path, t, tau, frame, tol_scale).at(static_cast<std::size_t>(i));
}

/// G(t) with the three closed forms of G'(t) and a central difference.
struct DerivativeReport {
    double t = 0.0;
    double g_value = 0.0;
    double rhs_2_6 = 0.0;  // -sum rho u B w + sum rho_j u_k |K_jk|^2 e^{-phi_j-phi_k} w_j w_k
    double rhs_2_7 = 0.0;  // symmetrized: 1/2 sum (rho_j - rho_k)(u_k - u_j) |K_jk|^2 ...
    double rhs_2_8 = 0.0;  // sum over u_j < 0 < u_k of (u_k - u_j) |K_jk|^2 ...
    double fd_estimate = 0.0;
    double fd_step = default_fd_step;
    double max_pairwise_dev = 0.0;  // relative to 1 + max |form|
    bool rho_is_negative_indicator = false;
};

namespace detail {

inline double max_pairwise_dev(double a, double b, double c) {
    const double scale = 1.0 + std::max({std::abs(a), std::abs(b), std::abs(c)});
    return std::max({std::abs(a - b), std::abs(b - c), std::abs(a - c)}) / scale;
}

} // namespace detail

inline DerivativeReport g_derivative_forms(const HomotopyPath& path, const RVector& rho, double t,
                                           const SpanFrame& frame, double fd_step = default_fd_step) {
    const WeightedSpace space(frame, path.weight_at(t));
    const RVector& u = path.direction();
    const RVector& w = frame.measure().masses();
    const Index m = u.size();

    DerivativeReport r;
    r.t = t;
    r.fd_step = fd_step;
    r.rho_is_negative_indicator = rho == path.negative_indicator();

    // normalized features: |Kt_jk|^2 e^{-phi_j - phi_k} = |ft_j . ft_k|^2
    const RVector half = (-0.5 * space.weight().values().array()).exp();
    const CMatrix ft = half.asDiagonal() * space.features();
    const RMatrix p = (ft * ft.adjoint()).cwiseAbs2();
    const RVector b = ft.rowwise().squaredNorm();

    r.g_value = w.cwiseProduct(rho).dot(b);

    const RVector wu = w.cwiseProduct(u);
    const RVector wrho = w.cwiseProduct(rho);
    r.rhs_2_6 = -wrho.cwiseProduct(u).dot(b) + wrho.dot(p * wu);

    double s7 = 0.0;
    double s8 = 0.0;
    for (Index j = 0; j < m; ++j) {
        for (Index k = 0; k < m; ++k) {
            const double pw = p(j, k) * w(j) * w(k);
            s7 += (rho(j) - rho(k)) * (u(k) - u(j)) * pw;
            if (u(j) < 0.0 && u(k) > 0.0) s8 += (u(k) - u(j)) * pw;
        }
    }
    r.rhs_2_7 = 0.5 * s7;
    r.rhs_2_8 = s8;

    r.fd_estimate = (g_of_t(path, rho, t + fd_step, frame) - g_of_t(path, rho, t - fd_step, frame)) / (2.0 * fd_step);
    r.max_pairwise_dev = r.rho_is_negative_indicator ? detail::max_pairwise_dev(r.rhs_2_6, r.rhs_2_7, r.rhs_2_8)
                                                     : std::abs(r.rhs_2_6 - r.rhs_2_7) /
                                                           (1.0 + std::max(std::abs(r.rhs_2_6), std::abs(r.rhs_2_7)));
    return r;
}

struct GSample {
    double t = 0.0;
    double g = 0.0;
};

/// G(t) on the path's grid with rho = 1_{u<0}.
inline std::vector<GSample> monotonicity_sweep(const HomotopyPath& path, const SpanFrame& frame) {
    const RVector rho = path.negative_indicator();
    std::vector<GSample> out;
    out.reserve(path.t_grid().size());
    for (const double t : path.t_grid()) out.push_back({t, g_of_t(path, rho, t, frame)});
    return out;
}

/// True when consecutive samples never drop by more than tol.
inline bool is_nondecreasing(std::span<const GSample> samples, double tol = 1e-12) {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].g < samples[i - 1].g - tol) return false;
    return true;
}

/// Convergence order of the central difference of G at t, measured between
/// consecutive steps. Pairs whose finer error sits at the round-off floor are
/// reported as NaN.
struct FdOrder {
    std::vector<double> steps;
    std::vector<double> errors;
    std::vector<double> orders;  // orders[i] from steps[i] -> steps[i+1]
};

inline FdOrder measure_fd_order(const HomotopyPath& path, const RVector& rho, double t, const SpanFrame& frame,
                                std::span<const double> steps) {
    const DerivativeReport exact = g_derivative_forms(path, rho, t, frame, steps.empty() ? default_fd_step : steps[0]);
    const double target = exact.rho_is_negative_indicator ? exact.rhs_2_8 : exact.rhs_2_7;
    FdOrder out;
    for (const double h : steps) {
        const double fd = (g_of_t(path, rho, t + h, frame) - g_of_t(path, rho, t - h, frame)) / (2.0 * h);
        out.steps.push_back(h);
        out.errors.push_back(std::abs(fd - target));
    }
    const double g_scale = 1.0 + std::abs(exact.g_value);
    for (std::size_t i = 0; i + 1 < out.steps.size(); ++i) {
        const double floor = 1e3 * std::numeric_limits<double>::epsilon() * g_scale / out.steps[i + 1];
        if (out.errors[i + 1] <= floor || out.errors[i] <= floor) {
            out.orders.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        out.orders.push_back(std::log(out.errors[i] / out.errors[i + 1]) / std::log(out.steps[i] / out.steps[i + 1]));
    }
    return out;
}

} // namespace bergman
