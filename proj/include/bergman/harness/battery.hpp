#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bergman/harness/config.hpp"
#include "bergman/harness/runner.hpp"

namespace bergman::harness {

struct SizeBounds {
    Index min_nodes = 2;
    Index max_nodes = 50;
    Index min_dim = 1;
    Index max_dim = 10;
    bool null_span = false;  // tabulated zero span: every space has rank 0
};

namespace detail {

inline std::mt19937_64 instance_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index), std::uint32_t(index >> 32),
                      std::uint32_t(stream)};
    return std::mt19937_64(seq);
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline DiscreteSpec random_discrete_measure(std::mt19937_64& rng, Index m) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> log_mass(std::log(0.1), std::log(10.0));
    DiscreteSpec d;
    for (Index j = 0; j < m; ++j) {
        const double r = std::sqrt(unit(rng));
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        d.points.push_back(std::polar(r, theta));
        d.masses.push_back(std::exp(log_mass(rng)));
    }
    return d;
}

inline SpanSpec random_span(std::mt19937_64& rng, Index m, Index dim, bool null_span) {
    if (null_span) return TabulatedSpanSpec{CMatrix::Zero(m, dim)};
    if (std::bernoulli_distribution(0.5)(rng)) return MonomialSpec{static_cast<int>(dim - 1)};
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix v(m, dim);
    for (Index j = 0; j < m; ++j)
        for (Index c = 0; c < dim; ++c) {
            const double re = gauss(rng);
            v(j, c) = cplx(re, gauss(rng));
        }
    return TabulatedSpanSpec{std::move(v)};
}

inline RVector uniform_weight(std::mt19937_64& rng, Index m) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    RVector v(m);
    for (Index j = 0; j < m; ++j) v(j) = u(rng);
    return v;
}

} // namespace detail

/// Random discrete instance `index` of the battery for `seed`. The same
/// (seed, index, bounds) always yields the same instance.
inline ScenarioConfig generate_instance(std::uint64_t seed, std::uint64_t index, const SizeBounds& bounds = {}) {
    auto rng = detail::instance_rng(seed, index, 0);
    const Index m = detail::uniform_index(rng, bounds.min_nodes, bounds.max_nodes);
    const Index dim = detail::uniform_index(rng, bounds.min_dim, bounds.max_dim);

    ScenarioConfig cfg;
    cfg.id = "battery-" + std::to_string(seed) + "-" + std::to_string(index);
    cfg.seed = seed;
    cfg.measure = detail::random_discrete_measure(rng, m);
    cfg.span = detail::random_span(rng, m, dim, bounds.null_span);
    cfg.phi.values = detail::uniform_weight(rng, m);

    // mostly independent weights, with some identical and ordered pairs mixed in
    const double mode = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (mode < 0.8) {
        cfg.psi.values = detail::uniform_weight(rng, m);
    } else if (mode < 0.9) {
        cfg.psi.values = cfg.phi.values;
    } else {
        std::uniform_real_distribution<double> gap(0.0, 2.0);
        cfg.psi.values = cfg.phi.values;
        for (Index j = 0; j < m; ++j) cfg.psi.values(j) -= gap(rng);
    }
    cfg.checks = {Check::structural, Check::comparison, Check::sweep, Check::homotopy};
    return cfg;
}

/// Random max-principle instance: Omega a proper subset, psi >= phi off Omega
/// by construction, arbitrary sign on Omega. The span dimension stays below
/// the node count: a span interpolating every function on the nodes has
/// B = 1/w for every weight, and the principle fails there.
inline ScenarioConfig generate_maxprinciple_instance(std::uint64_t seed, std::uint64_t index, const SizeBounds& bounds = {}) {
    auto rng = detail::instance_rng(seed, index, 1);
    const Index m = detail::uniform_index(rng, std::max<Index>(bounds.min_nodes, 2), bounds.max_nodes);
    const Index dim = detail::uniform_index(rng, std::min(bounds.min_dim, m - 1), std::min(bounds.max_dim, m - 1));

    ScenarioConfig cfg;
    cfg.id = "maxprinciple-" + std::to_string(seed) + "-" + std::to_string(index);
    cfg.seed = seed;
    cfg.measure = detail::random_discrete_measure(rng, m);
    cfg.span = detail::random_span(rng, m, dim, bounds.null_span);
    cfg.phi.values = detail::uniform_weight(rng, m);

    const Index omega_size = detail::uniform_index(rng, 1, m - 1);
    std::vector<Index> perm(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) perm[static_cast<std::size_t>(j)] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<char> in_omega(static_cast<std::size_t>(m), 0);
    for (Index i = 0; i < omega_size; ++i) {
        cfg.params.omega.push_back(perm[static_cast<std::size_t>(i)]);
        in_omega[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 1;
    }
    std::sort(cfg.params.omega.begin(), cfg.params.omega.end());

    // small perturbations keep the density premise reachable
    const double scale = std::exp(std::uniform_real_distribution<double>(std::log(1e-3), std::log(2.0))(rng));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    cfg.psi.values = cfg.phi.values;
    for (Index j = 0; j < m; ++j) {
        const double du = scale * unit(rng);
        cfg.psi.values(j) += in_omega[static_cast<std::size_t>(j)] ? (unit(rng) < 0.5 ? -du : du) : du;
    }
    cfg.checks = {Check::maxprinciple};
    return cfg;
}

namespace detail {

inline RunReport run_generated(Index n, std::uint64_t seed, const RunOptions& opt, const std::string& mode,
                               const std::function<ScenarioConfig(std::uint64_t)>& gen) {
    if (n < 1) throw invalid_configuration("battery: n_instances must be >= 1");
    RunReport report;
    report.meta.mode = mode;
    report.meta.seed = seed;
    report.meta.n_instances = n;
    report.meta.tol_scale = opt.tol_scale;
    report.scenarios.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), opt.workers,
                 [&](std::size_t i) { report.scenarios[i] = run_scenario(gen(i), opt); });
    return report;
}

} // namespace detail

/// Structural, comparison, sweep and homotopy checks on n seeded instances.
inline RunReport run_battery(Index n_instances, std::uint64_t seed, const SizeBounds& bounds = {}, const RunOptions& opt = {}) {
    return detail::run_generated(n_instances, seed, opt, "battery",
                                 [&](std::uint64_t i) { return generate_instance(seed, i, bounds); });
}

/// Contrapositive search for maximum-principle counterexamples.
inline RunReport run_maxprinciple_search(Index n_instances, std::uint64_t seed, const SizeBounds& bounds = {},
                                         const RunOptions& opt = {}) {
    return detail::run_generated(n_instances, seed, opt, "maxprinciple",
                                 [&](std::uint64_t i) { return generate_maxprinciple_instance(seed, i, bounds); });
}

} // namespace bergman::harness
