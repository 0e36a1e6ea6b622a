#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bergman/comparison.hpp"
#include "bergman/harness/config.hpp"
#include "bergman/homotopy.hpp"
#include "bergman/kernel.hpp"
#include "bergman/quantization.hpp"

namespace bergman::harness {

struct Metric {
    std::string name;
    double value = 0.0;
};

struct CheckOutcome {
    Check check = Check::structural;
    bool passed = true;
    std::string detail;
    std::vector<Metric> metrics;
    double seconds = 0.0;  // wall clock; kept out of the deterministic report files
};

struct StructuralRow {
    std::string scenario_id;
    std::string weight;  // phi or psi
    Index rank = 0;
    double trace_defect = 0.0;
    double orthonormality_defect = 0.0;
    double reproducing_residual = std::numeric_limits<double>::quiet_NaN();
    double min_eig_rel = std::numeric_limits<double>::quiet_NaN();
    double shift_defect = 0.0;
};

struct ComparisonRow {
    std::string scenario_id;
    double c = 0.0;
    Index set_size = 0;
    bool set_proper = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    std::string verdict;
};

struct HomotopyRow {
    std::string scenario_id;
    double t = 0.0;
    double g = 0.0;
    double rhs26 = 0.0;
    double rhs27 = 0.0;
    double rhs28 = 0.0;
    double fd = 0.0;
    double fd_step = 0.0;
    double max_pairwise_dev = 0.0;
};

struct TczRow {
    std::string scenario_id;
    double k = 0.0;
    int degree = 0;
    Index n_eval_points = 0;
    double max_abs_dev = 0.0;
    double mean_abs_dev = 0.0;
};

struct MaxPrincipleRow {
    std::string scenario_id;
    Index omega_size = 0;
    bool density_premise = false;
    bool boundary_premise = false;
    std::string verdict;
    Index witness = -1;
};

struct ScenarioResult {
    std::string id;
    std::vector<CheckOutcome> checks;
    std::optional<std::string> error;
    std::optional<json> failure_dump;  // the full scenario, re-runnable as is

    std::vector<StructuralRow> structural;
    std::vector<ComparisonRow> comparison;
    std::vector<ComparisonRow> sweep;
    std::vector<HomotopyRow> homotopy;
    std::vector<TczRow> tcz;
    std::vector<MaxPrincipleRow> maxprinciple;

    [[nodiscard]] bool passed() const {
        return !error && std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
    }
};

struct RunOptions {
    double tol_scale = 1.0;
    int workers = 1;
};

struct RunMetadata {
    std::string mode = "run";  // run | battery | maxprinciple
    std::optional<std::uint64_t> seed;
    Index n_instances = 0;
    double tol_scale = 1.0;
    std::vector<std::string> sources;
};

struct RunReport {
    RunMetadata meta;
    std::vector<ScenarioResult> scenarios;

    [[nodiscard]] bool green() const {
        return std::all_of(scenarios.begin(), scenarios.end(), [](const ScenarioResult& s) { return s.passed(); });
    }
    [[nodiscard]] const ScenarioResult* first_failure() const {
        for (const auto& s : scenarios)
            if (!s.passed()) return &s;
        return nullptr;
    }
    [[nodiscard]] bool has(Check c) const {
        for (const auto& s : scenarios)
            for (const auto& o : s.checks)
                if (o.check == c) return true;
        return false;
    }
};

// ---------------------------------------------------------------------------

namespace detail {

// Dense kernel work (reproducing residual, eigenvalues) is skipped above this node count.
inline constexpr Index dense_node_limit = 1024;

struct Context {
    const ScenarioConfig& cfg;
    double tol;
    QuadratureMeasure measure;
    SpanFrame frame;
    WeightFunction phi;
    WeightFunction psi;
};

inline void note(CheckOutcome& out, bool ok, const std::string& what) {
    if (ok) return;
    out.passed = false;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += what;
}

inline StructuralRow structural_one(const Context& ctx, const WeightFunction& w, const std::string& label,
                                    CheckOutcome& out) {
    const double tol = ctx.tol;
    const WeightedSpace space(ctx.frame, w);
    StructuralRow row;
    row.scenario_id = ctx.cfg.id;
    row.weight = label;
    row.rank = space.rank();

    const BergmanDensity b = bergman_density(space);
    row.trace_defect = std::abs(density_mass(b, ctx.measure) - double(row.rank));
    note(out, row.trace_defect <= tol * 1e-9 * std::max(1.0, double(row.rank)), label + ": trace identity");
    note(out, b.values.size() == 0 || b.values.minCoeff() >= 0.0, label + ": negative density");

    row.orthonormality_defect = space.orthonormality_defect();
    note(out, row.orthonormality_defect <= tol * 1e-10, label + ": orthonormality");

    const double c = 1.0;
    const WeightedSpace shifted(ctx.frame, w.shifted(c));
    const RVector b_shift = bergman_density(shifted).values;
    for (Index j = 0; j < b.values.size(); ++j)
        row.shift_defect = std::max(row.shift_defect, std::abs(b_shift(j) - b.values(j)) / (1.0 + b.values(j)));
    note(out, row.shift_defect <= tol * 1e-12, label + ": shift covariance of B");

    if (ctx.measure.size() <= dense_node_limit) {
        const KernelMatrix k = kernel_matrix(space);
        const KernelMatrix ks = kernel_matrix(shifted);
        const double kmax = k.values.size() ? k.values.cwiseAbs().maxCoeff() : 0.0;
        if (kmax > 0.0) {
            const double kdev = (std::exp(-c) * ks.values - k.values).cwiseAbs().maxCoeff() / kmax;
            note(out, kdev <= tol * 1e-12, label + ": shift covariance of K");
        }
        row.reproducing_residual = reproducing_residual(k, space.weight(), ctx.measure);
        note(out, row.reproducing_residual <= tol * 1e-9 * std::max(1.0, kmax), label + ": reproducing residual");
        row.min_eig_rel = kernel_min_eigen_relative(k);
        note(out, row.min_eig_rel >= -tol * 1e-12, label + ": kernel not positive semidefinite");
    }
    out.metrics.push_back({label + ".rank", double(row.rank)});
    out.metrics.push_back({label + ".trace_defect", row.trace_defect});
    out.metrics.push_back({label + ".orthonormality_defect", row.orthonormality_defect});
    out.metrics.push_back({label + ".shift_defect", row.shift_defect});
    out.metrics.push_back({label + ".reproducing_residual", row.reproducing_residual});
    return row;
}

inline void run_structural(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    res.structural.push_back(structural_one(ctx, ctx.phi, "phi", out));
    res.structural.push_back(structural_one(ctx, ctx.psi, "psi", out));
}

inline std::string verdict_of(const ComparisonReport& r, Index psi_rank, double tol) {
    if (!r.holds(tol)) return "violation";
    return to_string(strictness_check(r, psi_rank > 0));
}

inline ComparisonRow comparison_row(const std::string& id, const ComparisonReport& r, const std::string& verdict) {
    return {id, r.shift, r.set_size, r.set_proper, r.lhs, r.rhs, r.margin, verdict};
}

inline void run_comparison(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    const ComparisonReport r = comparison_integrals(ctx.phi, ctx.psi, ctx.frame, 0.0);
    const Index psi_rank = WeightedSpace(ctx.frame, ctx.psi).rank();
    const std::string verdict = verdict_of(r, psi_rank, ctx.tol);
    res.comparison.push_back(comparison_row(ctx.cfg.id, r, verdict));
    note(out, r.holds(ctx.tol), "lhs > rhs");
    note(out, verdict != "violated", "strict inequality expected but margin <= threshold");

    const SandwichResult s = sandwich_check(ctx.phi, ctx.psi, ctx.frame, ctx.tol);
    note(out, s.holds(), "reduction chain: " + s.failure());

    out.metrics.push_back({"lhs", r.lhs});
    out.metrics.push_back({"rhs", r.rhs});
    out.metrics.push_back({"margin", r.margin});
    out.metrics.push_back({"set_size", double(r.set_size)});
    out.metrics.push_back({"reduced_middle", s.middle});
}

inline void run_sweep(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    std::vector<double> grid = ctx.cfg.params.c_grid;
    const auto reports = shifted_comparison_sweep(ctx.phi, ctx.psi, ctx.frame, grid);
    const Index psi_rank = WeightedSpace(ctx.frame, ctx.psi).rank();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) {
        const std::string verdict = verdict_of(r, psi_rank, ctx.tol);
        res.sweep.push_back(comparison_row(ctx.cfg.id, r, verdict));
        note(out, r.holds(ctx.tol), "lhs > rhs at c = " + std::to_string(r.shift));
        worst = std::min(worst, r.margin + r.tolerance(ctx.tol));
    }
    // sublevel sets grow with c
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
        note(out, reports[order[i - 1]].set_size <= reports[order[i]].set_size, "sublevel sets not nested in c");
    out.metrics.push_back({"min_margin_over_tolerance", reports.empty() ? 0.0 : worst});
}

inline void run_homotopy(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    const Params& p = ctx.cfg.params;
    const double tol = ctx.tol;
    const HomotopyPath path(ctx.phi, ctx.psi, p.t_grid.empty() ? default_t_grid() : p.t_grid);
    const RVector rho = path.negative_indicator();

    double worst_dev = 0.0;
    double min_rhs28 = std::numeric_limits<double>::infinity();
    for (const double t : path.t_grid()) {
        const DerivativeReport d = g_derivative_forms(path, rho, t, ctx.frame, p.fd_step);
        res.homotopy.push_back({ctx.cfg.id, t, d.g_value, d.rhs_2_6, d.rhs_2_7, d.rhs_2_8, d.fd_estimate, d.fd_step,
                                d.max_pairwise_dev});
        worst_dev = std::max(worst_dev, d.max_pairwise_dev);
        min_rhs28 = std::min(min_rhs28, d.rhs_2_8);
    }
    note(out, worst_dev <= tol * 1e-10, "derivative forms disagree");
    note(out, min_rhs28 >= -tol * 1e-12, "negative derivative");

    std::vector<GSample> samples;
    for (const auto& row : res.homotopy)
        if (row.scenario_id == ctx.cfg.id) samples.push_back({row.t, row.g});
    note(out, is_nondecreasing(samples, tol * 1e-12), "G decreases along the grid");

    const ComparisonReport cmp = comparison_integrals(ctx.phi, ctx.psi, ctx.frame, 0.0);
    const double g0 = g_of_t(path, rho, 0.0, ctx.frame);
    const double g1 = g_of_t(path, rho, 1.0, ctx.frame);
    const double endpoint_dev = std::max(std::abs(g0 - cmp.lhs), std::abs(g1 - cmp.rhs));
    note(out, endpoint_dev <= tol * 1e-12, "endpoints differ from the comparison integrals");

    const DerivativeReport at = g_derivative_forms(path, rho, p.fd_t, ctx.frame, p.fd_step);
    const double fd_dev = std::abs(at.fd_estimate - at.rhs_2_8);
    note(out, fd_dev <= tol * 1e-6 * (1.0 + std::abs(at.rhs_2_8)), "finite difference of G disagrees");

    const FdOrder order = measure_fd_order(path, rho, p.fd_t, ctx.frame, p.fd_steps);
    double worst_order_dev = 0.0;
    for (const double o : order.orders)
        if (std::isfinite(o)) worst_order_dev = std::max(worst_order_dev, std::abs(o - 2.0));
    note(out, worst_order_dev <= 0.2, "finite-difference order off 2");

    // kernel derivative formula against a Richardson-extrapolated central difference
    double kernel_dev = std::numeric_limits<double>::quiet_NaN();
    if (ctx.measure.size() <= dense_node_limit) {
        const WeightedSpace st(ctx.frame, path.weight_at(p.fd_t));
        const CMatrix exact = kernel_derivative_rhs(path, st);
        const CMatrix coarse = kernel_fd(path, p.fd_t, p.fd_step, ctx.frame);
        const CMatrix fine = kernel_fd(path, p.fd_t, p.fd_step / 2.0, ctx.frame);
        const CMatrix fd = (4.0 * fine - coarse) / 3.0;
        const double scale = 1.0 + (exact.size() ? exact.cwiseAbs().maxCoeff() : 0.0);
        kernel_dev = exact.size() ? (exact - fd).cwiseAbs().maxCoeff() / scale : 0.0;
        note(out, kernel_dev <= tol * 1e-8, "kernel derivative formula disagrees with finite difference");
    }

    Index bound_violations = 0;
    for (const double t0 : {0.0, p.fd_t})
        for (const double tau : p.bound_taus) {
            for (const auto& b : difference_quotient_bounds(path, t0, tau, ctx.frame, tol)) bound_violations += !b.holds;
            for (const auto& b : l2_difference_bounds(path, t0, tau, ctx.frame, tol)) bound_violations += !b.holds;
        }
    note(out, bound_violations == 0, std::to_string(bound_violations) + " kernel bound violations");

    out.metrics.push_back({"max_pairwise_dev", worst_dev});
    out.metrics.push_back({"min_rhs28", min_rhs28});
    out.metrics.push_back({"endpoint_dev", endpoint_dev});
    out.metrics.push_back({"fd_dev", fd_dev});
    out.metrics.push_back({"fd_order_dev", worst_order_dev});
    out.metrics.push_back({"kernel_derivative_dev", kernel_dev});
    out.metrics.push_back({"bound_violations", double(bound_violations)});
}

inline void run_tcz(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    const Params& p = ctx.cfg.params;
    if (!ctx.measure.disk()) throw invalid_configuration("tcz check needs a disk measure");
    const double radius = p.interior_radius.value_or(ctx.measure.disk()->radius / 2.0);
    const auto reports =
        tcz_convergence_report(ctx.phi, p.k_ladder, proportional_degree_rule(p.degree_factor), ctx.measure, radius);
    for (const auto& r : reports)
        res.tcz.push_back({ctx.cfg.id, r.k, r.degree, Index(r.eval_points.size()), r.max_abs_dev_from_1, r.mean_abs_dev});
    if (reports.empty()) return;
    if (reports.back().eval_points.empty()) {
        out.detail = "all eval points skipped (curvature not positive)";
        out.metrics.push_back({"skipped", double(reports.back().skipped.size())});
        return;
    }
    const double final_dev = reports.back().max_abs_dev_from_1;
    note(out, final_dev <= p.tcz_max_dev * ctx.tol, "final deviation above limit");
    note(out, deviations_nonincreasing(reports, p.tcz_slack), "deviation grows along the k ladder");
    out.metrics.push_back({"final_max_abs_dev", final_dev});
    out.metrics.push_back({"skipped", double(reports.back().skipped.size())});
}

inline void run_maxprinciple(const Context& ctx, CheckOutcome& out, ScenarioResult& res) {
    const auto& omega = ctx.cfg.params.omega;
    const MaxPrincipleResult r = max_principle_check(ctx.phi, ctx.psi, omega, ctx.frame, ctx.tol);
    res.maxprinciple.push_back(
        {ctx.cfg.id, Index(omega.size()), r.density_premise, r.boundary_premise, to_string(r.verdict), r.witness});
    note(out, r.verdict != MaxPrincipleVerdict::counterexample, "counterexample at node " + std::to_string(r.witness));
    out.detail = out.passed ? to_string(r.verdict) : out.detail;
}

} // namespace detail

/// Runs the requested checks in declared order. Module errors are captured
/// on the result with the scenario id.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
    ScenarioResult res;
    res.id = cfg.id;
    try {
        QuadratureMeasure mu = build_measure(cfg.measure);
        SpanFrame frame(build_span(cfg.span), mu, cfg.params.rank_tol);
        WeightFunction phi = build_weight(cfg.phi, mu);
        WeightFunction psi = build_weight(cfg.psi, mu);
        const detail::Context ctx{cfg, opt.tol_scale, std::move(mu), std::move(frame), std::move(phi), std::move(psi)};
        for (const Check c : cfg.checks) {
            CheckOutcome out;
            out.check = c;
            const auto start = std::chrono::steady_clock::now();
            switch (c) {
            case Check::structural: detail::run_structural(ctx, out, res); break;
            case Check::comparison: detail::run_comparison(ctx, out, res); break;
            case Check::sweep: detail::run_sweep(ctx, out, res); break;
            case Check::homotopy: detail::run_homotopy(ctx, out, res); break;
            case Check::tcz: detail::run_tcz(ctx, out, res); break;
            case Check::maxprinciple: detail::run_maxprinciple(ctx, out, res); break;
            }
            out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            res.checks.push_back(std::move(out));
        }
    } catch (const std::exception& e) {
        res.error = cfg.id + ": " + e.what();
    }
    if (!res.passed()) res.failure_dump = to_json(cfg);
    return res;
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

inline RunReport run_scenarios(const std::vector<ScenarioConfig>& configs, const RunOptions& opt = {}) {
    RunReport report;
    report.meta.mode = "run";
    report.meta.tol_scale = opt.tol_scale;
    report.meta.n_instances = Index(configs.size());
    report.scenarios.resize(configs.size());
    parallel_for(configs.size(), opt.workers, [&](std::size_t i) { report.scenarios[i] = run_scenario(configs[i], opt); });
    return report;
}

} // namespace bergman::harness
