#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/kernel.hpp"
#include "bergman/types.hpp"
#include "bergman/weight.hpp"

namespace bergman {

/// Absolute margin above which a comparison counts as strict.
inline constexpr double strictness_threshold = 1e-10;

/// {j : psi_j < phi_j + c}. Ties are excluded.
struct SublevelSet {
    std::vector<Index> indices;
    double shift = 0.0;
    RVector indicator;  // rho: 1 on the set, 0 off it

    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(indices.size()); }
    [[nodiscard]] bool empty() const noexcept { return indices.empty(); }
    [[nodiscard]] bool contains(Index j) const { return indicator(j) != 0.0; }
};

inline SublevelSet sublevel_set(const WeightFunction& phi, const WeightFunction& psi, double c) {
    if (phi.size() != psi.size()) throw dimension_mismatch("sublevel_set: weights tabulated on different node sets");
    SublevelSet s;
    s.shift = c;
    s.indicator = RVector::Zero(phi.size());
    for (Index j = 0; j < phi.size(); ++j) {
        if (psi(j) < phi(j) + c) {
            s.indices.push_back(j);
            s.indicator(j) = 1.0;
        }
    }
    return s;
}

/// Both sides of the Bergman comparison inequality over one sublevel set.
struct ComparisonReport {
    double shift = 0.0;
    double lhs = 0.0;  // sum_{S} w_j B_phi(z_j)
    double rhs = 0.0;  // sum_{S} w_j B_psi(z_j)
    double margin = 0.0;
    Index set_size = 0;
    bool set_proper = false;       // S nonempty and not everything
    bool strict_expected = false;  // proper set, holomorphic domain, rhs > 0

    [[nodiscard]] double tolerance(double tol_scale = 1.0) const { return tol_scale * 1e-12 * (1.0 + rhs); }
    [[nodiscard]] bool holds(double tol_scale = 1.0) const { return margin >= -tolerance(tol_scale); }
};

namespace detail {

inline double masked_mass(const RVector& density, const QuadratureMeasure& mu, const SublevelSet& s) {
    double acc = 0.0;
    for (const Index j : s.indices) acc += mu.mass(j) * density(j);
    return acc;
}

inline ComparisonReport make_report(const SublevelSet& s, const RVector& b_phi, const RVector& b_psi,
                                    const SpanFrame& frame) {
    ComparisonReport r;
    r.shift = s.shift;
    r.lhs = masked_mass(b_phi, frame.measure(), s);
    r.rhs = masked_mass(b_psi, frame.measure(), s);
    r.margin = r.rhs - r.lhs;
    r.set_size = s.size();
    r.set_proper = !s.empty() && s.size() < frame.measure().size();
    r.strict_expected = r.set_proper && frame.holomorphic_domain() && r.rhs > 0.0;
    return r;
}

} // namespace detail

/// Evaluate sum_{psi < phi + c} w B_phi against sum_{psi < phi + c} w B_psi.
inline ComparisonReport comparison_integrals(const WeightFunction& phi, const WeightFunction& psi,
                                             const SpanFrame& frame, double c = 0.0) {
    const WeightedSpace sp_phi(frame, phi);
    const WeightedSpace sp_psi(frame, psi);
    const SublevelSet s = sublevel_set(sp_phi.weight(), sp_psi.weight(), c);
    return detail::make_report(s, bergman_density(sp_phi).values, bergman_density(sp_psi).values, frame);
}

/// psi_0 = phi + min(psi - phi, 0): agrees with psi where psi < phi and
/// never exceeds phi.
inline WeightFunction reduce_less_singular(const WeightFunction& phi, const WeightFunction& psi) {
    if (phi.size() != psi.size()) throw dimension_mismatch("reduce_less_singular: weights tabulated on different node sets");
    RVector v(phi.size());
    for (Index j = 0; j < phi.size(); ++j) v(j) = phi(j) + std::min(psi(j) - phi(j), 0.0);
    return WeightFunction(std::move(v));
}

struct SandwichResult {
    double lhs = 0.0;     // sum_{psi<phi} w B_phi
    double middle = 0.0;  // sum_{psi0<phi} w B_psi0
    double rhs = 0.0;     // sum_{psi<phi} w B_psi
    bool first_link = true;
    bool second_link = true;
    bool same_set = true;  // {psi0 < phi} == {psi < phi}

    [[nodiscard]] bool holds() const noexcept { return first_link && second_link && same_set; }
    [[nodiscard]] std::string failure() const {
        if (!same_set) return "sublevel sets of psi and psi0 differ";
        if (!first_link) return "first link: lhs > middle";
        if (!second_link) return "second link: middle > rhs";
        return {};
    }
};

/// Checks lhs(phi) <= middle(psi0) <= rhs(psi) through the less-singular reduction.
inline SandwichResult sandwich_check(const WeightFunction& phi, const WeightFunction& psi, const SpanFrame& frame,
                                     double tol_scale = 1.0) {
    const WeightedSpace sp_phi(frame, phi);
    const WeightedSpace sp_psi(frame, psi);
    const WeightFunction psi0 = reduce_less_singular(sp_phi.weight(), sp_psi.weight());
    const WeightedSpace sp_psi0(frame, psi0);

    const SublevelSet s = sublevel_set(sp_phi.weight(), sp_psi.weight(), 0.0);
    const SublevelSet s0 = sublevel_set(sp_phi.weight(), psi0, 0.0);

    SandwichResult r;
    r.same_set = s.indices == s0.indices;
    const auto& mu = frame.measure();
    r.lhs = detail::masked_mass(bergman_density(sp_phi).values, mu, s);
    r.middle = detail::masked_mass(bergman_density(sp_psi0).values, mu, s0);
    r.rhs = detail::masked_mass(bergman_density(sp_psi).values, mu, s);
    r.first_link = r.lhs <= r.middle + tol_scale * 1e-12 * (1.0 + r.middle);
    r.second_link = r.middle <= r.rhs + tol_scale * 1e-12 * (1.0 + r.rhs);
    return r;
}

/// One report per shift c, in grid order. Both densities are computed once.
inline std::vector<ComparisonReport> shifted_comparison_sweep(const WeightFunction& phi, const WeightFunction& psi,
                                                              const SpanFrame& frame, std::span<const double> c_grid) {
    const WeightedSpace sp_phi(frame, phi);
    const WeightedSpace sp_psi(frame, psi);
    const RVector b_phi = bergman_density(sp_phi).values;
    const RVector b_psi = bergman_density(sp_psi).values;
    std::vector<ComparisonReport> out;
    out.reserve(c_grid.size());
    for (const double c : c_grid)
        out.push_back(detail::make_report(sublevel_set(sp_phi.weight(), sp_psi.weight(), c), b_phi, b_psi, frame));
    return out;
}

enum class Strictness { strict, equal_both_zero, not_applicable, violated };

inline const char* to_string(Strictness s) {
    switch (s) {
    case Strictness::strict: return "strict";
    case Strictness::equal_both_zero: return "equal-both-zero";
    case Strictness::not_applicable: return "not-applicable";
    case Strictness::violated: return "violated";
    }
    return "?";
}

/// Classify a comparison against the strict-inequality clause. A margin above
/// the threshold is reported strict wherever it is observed; `violated` is only
/// possible when strictness is guaranteed (holomorphic span on a discretized
/// domain, proper sublevel set, nontrivial kernel for psi).
inline Strictness strictness_check(const ComparisonReport& report, bool kernel_psi_nontrivial) {
    if (report.lhs == 0.0 && report.rhs == 0.0) return Strictness::equal_both_zero;
    if (report.margin > strictness_threshold) return Strictness::strict;
    if (report.strict_expected && kernel_psi_nontrivial) return Strictness::violated;
    return Strictness::not_applicable;
}

enum class MaxPrincipleVerdict { premises_fail, conclusion_holds, counterexample };

inline const char* to_string(MaxPrincipleVerdict v) {
    switch (v) {
    case MaxPrincipleVerdict::premises_fail: return "premises-fail";
    case MaxPrincipleVerdict::conclusion_holds: return "conclusion-holds";
    case MaxPrincipleVerdict::counterexample: return "counterexample";
    }
    return "?";
}

struct MaxPrincipleResult {
    MaxPrincipleVerdict verdict = MaxPrincipleVerdict::premises_fail;
    bool density_premise = false;  // B_phi >= B_psi on Omega
    bool boundary_premise = false; // phi <= psi off Omega
    Index witness = -1;            // a node with psi < phi when the premises hold
};

/// Tolerances: the density premise allows 1e-12 (1 + B_psi) slack; a node
/// counts against the conclusion only when psi < phi - 1e-9.
inline MaxPrincipleResult max_principle_check(const WeightFunction& phi, const WeightFunction& psi,
                                              std::span<const Index> omega, const SpanFrame& frame,
                                              double tol_scale = 1.0) {
    const Index m = frame.measure().size();
    std::vector<char> in_omega(static_cast<std::size_t>(m), 0);
    for (const Index j : omega) {
        if (j < 0 || j >= m) throw precondition_error("max_principle_check: node index out of range", j);
        in_omega[static_cast<std::size_t>(j)] = 1;
    }
    if (std::all_of(in_omega.begin(), in_omega.end(), [](char c) { return c != 0; }))
        throw precondition_error("max_principle_check: Omega must not be the whole node set");

    const WeightedSpace sp_phi(frame, phi);
    const WeightedSpace sp_psi(frame, psi);
    const RVector& p = sp_phi.weight().values();
    const RVector& q = sp_psi.weight().values();

    MaxPrincipleResult r;
    r.boundary_premise = true;
    for (Index j = 0; j < m; ++j)
        if (!in_omega[static_cast<std::size_t>(j)] && p(j) > q(j)) r.boundary_premise = false;

    const RVector b_phi = bergman_density(sp_phi).values;
    const RVector b_psi = bergman_density(sp_psi).values;
    r.density_premise = true;
    for (const Index j : omega)
        if (b_phi(j) < b_psi(j) - tol_scale * 1e-12 * (1.0 + b_psi(j))) r.density_premise = false;

    if (!(r.boundary_premise && r.density_premise)) {
        r.verdict = MaxPrincipleVerdict::premises_fail;
        return r;
    }
    r.verdict = MaxPrincipleVerdict::conclusion_holds;
    for (Index j = 0; j < m; ++j)
        if (q(j) < p(j) - tol_scale * 1e-9) {
            r.verdict = MaxPrincipleVerdict::counterexample;
            r.witness = j;
            break;
        }
    return r;
}

} // namespace bergman
