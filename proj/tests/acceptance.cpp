// One line per acceptance criterion; exit status 1 if any is red.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bergman/bergman.hpp"
#include "bergman/harness.hpp"
#include "oracles.hpp"

using namespace bergman;
using namespace bergman::harness;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string note;
};

int failures = 0;

void report(int n, const std::string& name, double seconds, double limit, const Verdict& v) {
    const bool in_time = limit <= 0.0 || seconds <= limit;
    const bool ok = v.pass && in_time;
    failures += !ok;
    std::printf("%s %2d %-28s %7.2fs", ok ? "PASS" : "FAIL", n, name.c_str(), seconds);
    if (limit > 0.0) std::printf(" (limit %gs)", limit);
    if (!in_time) std::printf(" too slow");
    if (!v.note.empty()) std::printf("  %s", v.note.c_str());
    std::printf("\n");
    std::fflush(stdout);
}

template <class F>
void criterion(int n, const std::string& name, double limit, F&& f) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = f();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    report(n, name, std::chrono::duration<double>(Clock::now() - t0).count(), limit, v);
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Built {
    SpanFrame frame;
    WeightFunction phi;
    WeightFunction psi;
};

Built build(const ScenarioConfig& c) {
    const QuadratureMeasure mu = build_measure(c.measure);
    SpanFrame frame(build_span(c.span), mu);
    return {frame, build_weight(c.phi, mu), build_weight(c.psi, mu)};
}

constexpr int n_battery = 200;
constexpr std::uint64_t seed = 0;

} // namespace

int main() {
    std::vector<ScenarioConfig> battery;
    for (int i = 0; i < n_battery; ++i) battery.push_back(generate_instance(seed, std::uint64_t(i)));

    RunReport structural_run;
    criterion(1, "trace identity", 10.0, [&] {
        std::vector<ScenarioConfig> cfgs = battery;
        for (auto& c : cfgs) c.checks = {Check::structural};
        structural_run = run_scenarios(cfgs);
        double worst = 0.0;
        std::size_t rows = 0;
        for (const auto& s : structural_run.scenarios) {
            if (s.error) return Verdict{false, *s.error};
            for (const auto& r : s.structural) {
                worst = std::max(worst, r.trace_defect / std::max<double>(1.0, double(r.rank)));
                ++rows;
            }
        }
        return Verdict{rows == 2 * n_battery && worst <= 1e-9, "worst relative defect " + sci(worst)};
    });

    RunReport comparison_run;
    criterion(2, "comparison principle", 30.0, [&] {
        std::vector<ScenarioConfig> cfgs = battery;
        for (auto& c : cfgs) c.checks = {Check::comparison, Check::sweep};
        comparison_run = run_scenarios(cfgs);
        std::size_t violations = 0, rows = 0;
        for (const auto& s : comparison_run.scenarios) {
            if (s.error) return Verdict{false, *s.error};
            for (const auto* set : {&s.comparison, &s.sweep})
                for (const auto& r : *set) {
                    violations += !(r.lhs <= r.rhs + 1e-12 * (1.0 + r.rhs));
                    ++rows;
                }
        }
        return Verdict{violations == 0 && rows == 6 * n_battery,
                       std::to_string(violations) + " violations in " + std::to_string(rows) + " comparisons"};
    });

    criterion(3, "two-node reference", 0.0, [] {
        const SpanFrame frame(FunctionSpan::tabulated(CMatrix::Ones(2, 1)),
                              build_discrete_measure(std::vector<cplx>{{0, 0}, {1, 0}}, std::vector<double>{1, 1}));
        RVector phi(2), psi(2);
        phi << 0.0, 0.0;
        psi << -1.0, 1.0;
        const auto r = comparison_integrals(WeightFunction(phi), WeightFunction(psi), frame);
        const double e = std::exp(1.0);
        const double rhs = e / (e + 1.0 / e);
        const double err = std::max({std::abs(r.lhs - 0.5), std::abs(r.rhs - rhs), std::abs(r.margin - (rhs - 0.5))});
        return Verdict{err <= 1e-12, "lhs " + sci(r.lhs) + " rhs " + sci(r.rhs) + " error " + sci(err)};
    });

    criterion(4, "disk kernel oracle", 5.0, [] {
        const auto mu = build_disk_measure(1.0, 64, 128);
        const WeightedSpace space(SpanFrame(FunctionSpan::monomials(30), mu), eval_weight(family::Constant{0.0}, mu));
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> rad(0.0, 0.6), ang(0.0, 2.0 * std::numbers::pi);
        double worst = 0.0;
        for (int i = 0; i < 400; ++i) {
            const cplx z = std::polar(rad(rng), ang(rng)), zeta = std::polar(rad(rng), ang(rng));
            const cplx exact = oracle::disk_kernel_closed(z, zeta);
            worst = std::max(worst, std::abs(kernel_at(space, z, zeta) - exact) / std::abs(exact));
        }
        return Verdict{worst <= 1e-6, "max relative error " + sci(worst)};
    });

    criterion(5, "TCZ Fock scaling", 20.0, [] {
        const double R = 2.0;
        const auto mu = build_disk_measure(R, 128, 482);
        const std::vector<double> ks{10.0, 20.0, 40.0};
        const WeightFunction phi(family::Gauss{1.0});
        const auto reps = tcz_convergence_report(phi, ks, proportional_degree_rule(), mu, 1.0);
        const bool ladder = deviations_nonincreasing(reps, 0.1);
        const double final_dev = reps.back().max_abs_dev_from_1;
        double origin_err = 0.0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const WeightedSpace space(SpanFrame(FunctionSpan::monomials(reps[i].degree), mu), eval_weight(phi, mu).scaled(ks[i]));
            const double b0 = kernel_at(space, 0.0, 0.0).real();
            const double expected = 1.0 / oracle::gaussian_norm_of_one(ks[i], R);
            origin_err = std::max(origin_err, std::abs(std::numbers::pi * b0 / ks[i] - std::numbers::pi * expected / ks[i]));
        }
        std::string devs;
        for (const auto& r : reps) devs += sci(r.max_abs_dev_from_1) + " ";
        return Verdict{final_dev <= 0.05 && ladder && origin_err <= 1e-10,
                       "deviations " + devs + "origin error " + sci(origin_err)};
    });

    std::vector<Built> built;
    for (const auto& c : battery) built.push_back(build(c));

    criterion(6, "derivative forms", 60.0, [&] {
        double worst_dev = 0.0, min_rhs = 0.0, worst_fd = 0.0, worst_order = 0.0;
        std::size_t orders = 0;
        const std::vector<double> steps{1e-2, 1e-3, 1e-4};
        for (const auto& b : built) {
            const HomotopyPath path(b.phi, b.psi);
            const RVector rho = path.negative_indicator();
            for (const double t : path.t_grid()) {
                const auto r = g_derivative_forms(path, rho, t, b.frame, 1e-3);
                worst_dev = std::max(worst_dev, r.max_pairwise_dev);
                min_rhs = std::min(min_rhs, r.rhs_2_8);
                if (t == 0.5) worst_fd = std::max(worst_fd, std::abs(r.fd_estimate - r.rhs_2_8) / (1.0 + std::abs(r.rhs_2_8)));
            }
            for (const double o : measure_fd_order(path, rho, 0.5, b.frame, steps).orders)
                if (!std::isnan(o)) {
                    worst_order = std::max(worst_order, std::abs(o - 2.0));
                    ++orders;
                }
        }
        return Verdict{worst_dev <= 1e-10 && min_rhs >= -1e-12 && worst_fd <= 1e-6 && worst_order <= 0.2,
                       "pairwise " + sci(worst_dev) + " min rhs " + sci(min_rhs) + " fd " + sci(worst_fd) +
                           " order dev " + sci(worst_order) + " over " + std::to_string(orders) + " pairs"};
    });

    criterion(7, "monotonicity and endpoints", 0.0, [&] {
        std::size_t drops = 0;
        double worst_end = 0.0;
        for (const auto& b : built) {
            const HomotopyPath path(b.phi, b.psi);
            const auto g = monotonicity_sweep(path, b.frame);
            drops += !is_nondecreasing(g, 1e-12);
            const auto cmp = comparison_integrals(b.phi, b.psi, b.frame);
            worst_end = std::max({worst_end, std::abs(g.front().g - cmp.lhs), std::abs(g.back().g - cmp.rhs)});
        }
        return Verdict{drops == 0 && worst_end <= 1e-12,
                       std::to_string(drops) + " decreasing paths, endpoint error " + sci(worst_end)};
    });

    criterion(8, "difference bounds", 0.0, [&] {
        std::size_t violations = 0, checks = 0;
        for (const auto& b : built) {
            const HomotopyPath path(b.phi, b.psi);
            for (const double t : {0.0, 0.5})
                for (const double tau : {0.5, 0.1, 0.01}) {
                    for (const auto& c : difference_quotient_bounds(path, t, tau, b.frame)) violations += !c.holds, ++checks;
                    for (const auto& c : l2_difference_bounds(path, t, tau, b.frame)) violations += !c.holds, ++checks;
                }
        }
        return Verdict{violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " checks"};
    });

    criterion(9, "maximum principle search", 60.0, [] {
        const auto r = run_maxprinciple_search(10000, seed, {}, RunOptions{1.0, 1});
        std::size_t counter = 0, premises = 0;
        for (const auto& s : r.scenarios) {
            if (s.error) return Verdict{false, *s.error};
            for (const auto& row : s.maxprinciple) {
                counter += row.verdict == "counterexample";
                premises += row.verdict != "premises-fail";
            }
        }
        return Verdict{counter == 0, std::to_string(counter) + " counterexamples, premises met on " +
                                         std::to_string(premises) + " of 10000"};
    });

    criterion(10, "strictness on disk scenarios", 0.0, [] {
        const auto mu = build_disk_measure(1.0, 16, 32);
        const WeightFunction phi = eval_weight(family::Constant{0.0}, mu);
        double min_margin = INFINITY;
        int count = 0;
        std::string bad;
        for (const int degree : {4, 10})
            for (const double b : {-1.0, -0.75, -0.5, -0.25, -0.1, 0.1, 0.25, 0.5, 0.75, 1.0}) {
                const SpanFrame frame(FunctionSpan::monomials(degree), mu);
                const auto r = comparison_integrals(phi, eval_weight(family::Harmonic{b}, mu), frame);
                ++count;
                const bool ok = r.set_proper && r.set_size > 0 && frame.rank() >= 1 && r.margin > 1e-10;
                if (!ok) bad += " d=" + std::to_string(degree) + ",b=" + sci(b);
                min_margin = std::min(min_margin, r.margin);
            }
        return Verdict{bad.empty() && count == 20,
                       std::to_string(count) + " scenarios, min margin " + sci(min_margin) + bad};
    });

    std::printf("%s\n", failures == 0 ? "ALL ACCEPTANCE CRITERIA PASS" : "SOME ACCEPTANCE CRITERIA FAIL");
    return failures == 0 ? 0 : 1;
}
