#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bergman/harness.hpp"

namespace h = bergman::harness;

namespace {

void print_outcome(const h::RunReport& report, const std::string& out_dir) {
    std::size_t failed = 0;
    for (const auto& s : report.scenarios) {
        if (s.passed()) continue;
        if (++failed > 20) continue;
        if (s.error) {
            std::cerr << "error: " << *s.error << "\n";
            continue;
        }
        for (const auto& c : s.checks)
            if (!c.passed) std::cerr << "FAIL " << s.id << " [" << h::to_string(c.check) << "] " << c.detail << "\n";
    }
    std::cout << report.scenarios.size() - failed << "/" << report.scenarios.size() << " scenarios passed; reports in "
              << out_dir << "\n";
    if (const auto* f = report.first_failure())
        std::cout << "first failure: " << f->id << " (dump: " << out_dir << "/" << h::detail::failure_file_name(f->id) << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks for Bergman kernels of weighted finite-dimensional spaces"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    std::string format = "csv";
    h::RunOptions opt;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_option("--workers", opt.workers, "Parallel workers")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--tol-scale", opt.tol_scale, "Uniform tolerance multiplier")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    std::vector<std::string> files;
    auto* run = app.add_subcommand("run", "Run scenario files");
    run->add_option("files", files, "Scenario JSON files")->required()->check(CLI::ExistingFile);
    common(run);

    bergman::Index n = 200;
    std::uint64_t seed = 0;
    bergman::Index maxprinciple = 0;
    h::SizeBounds bounds;
    auto* battery = app.add_subcommand("battery", "Seeded randomized battery");
    battery->add_option("--n", n, "Number of instances")->check(CLI::PositiveNumber)->capture_default_str();
    battery->add_option("--seed", seed, "Battery seed")->capture_default_str();
    battery->add_option("--max-nodes", bounds.max_nodes, "Largest node count")->check(CLI::Range(2, 100000))->capture_default_str();
    battery->add_option("--max-dim", bounds.max_dim, "Largest span dimension")->check(CLI::Range(1, 1000))->capture_default_str();
    battery->add_flag("--null-span", bounds.null_span, "Zero span (every space has rank 0)");
    battery->add_option("--maxprinciple", maxprinciple,
                        "Run this many maximum-principle instances instead of the battery");
    common(battery);

    CLI11_PARSE(app, argc, argv);

    const auto fmt = format == "json" ? h::ReportFormat::json : h::ReportFormat::csv;
    try {
        h::RunReport report;
        if (run->parsed()) {
            std::vector<h::ScenarioConfig> configs;
            for (const auto& f : files) {
                auto part = h::load_scenarios(f);
                configs.insert(configs.end(), part.begin(), part.end());
            }
            report = h::run_scenarios(configs, opt);
            report.meta.sources = files;
        } else if (maxprinciple > 0) {
            report = h::run_maxprinciple_search(maxprinciple, seed, bounds, opt);
        } else {
            report = h::run_battery(n, seed, bounds, opt);
        }
        h::emit_report(report, fmt, out_dir);
        print_outcome(report, out_dir);
        return report.green() ? 0 : 1;
    } catch (const h::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
