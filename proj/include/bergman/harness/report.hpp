#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bergman/harness/runner.hpp"
#include "bergman/version.hpp"

namespace bergman::harness {

enum class ReportFormat { csv, json };

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(bool b) { return b ? "true" : "false"; }
inline std::string fmt(Index i) { return std::to_string(i); }
inline std::string fmt(int i) { return std::to_string(i); }

inline std::string fmt(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

template <class... T>
std::string csv_line(const T&... fields) {
    std::string line;
    ((line += (line.empty() ? "" : ",") + fmt(fields)), ...);
    return line + "\n";
}

// nan/inf are not valid JSON numbers
inline json num(double v) { return std::isfinite(v) ? json(v) : json(fmt(v)); }

class Sink {
public:
    explicit Sink(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw error("cannot write " + path.string());
    }
    Sink& operator<<(const std::string& s) {
        out_ << s;
        if (!out_) throw error("write failed: " + path_.string());
        return *this;
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline json metadata_json(const RunReport& r) {
    json meta;
    meta["tool"] = "bergman_lab";
    meta["version"] = version;
    meta["mode"] = r.meta.mode;
    meta["seed"] = r.meta.seed ? json(*r.meta.seed) : json(nullptr);
    meta["n_instances"] = r.meta.n_instances;
    meta["tol_scale"] = r.meta.tol_scale;
    meta["sources"] = r.meta.sources;
    meta["tolerances"] = {{"comparison", 1e-12},          {"strictness_threshold", strictness_threshold},
                          {"trace_identity", 1e-9},       {"orthonormality", 1e-10},
                          {"reproducing_residual", 1e-9}, {"derivative_forms", 1e-10},
                          {"fd_match", 1e-6},             {"monotonicity", 1e-12},
                          {"rank_tol", default_rank_tol}};
    meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
    return meta;
}

inline json summary_json(const RunReport& r) {
    json s;
    s["metadata"] = metadata_json(r);
    std::size_t failed = 0;
    for (const auto& sc : r.scenarios) failed += !sc.passed();
    s["scenarios"] = r.scenarios.size();
    s["failed"] = failed;
    s["green"] = r.green();
    if (const ScenarioResult* f = r.first_failure()) {
        json ff = {{"id", f->id}};
        if (f->error) ff["error"] = *f->error;
        for (const auto& c : f->checks)
            if (!c.passed) ff["checks"].push_back({{"check", to_string(c.check)}, {"detail", c.detail}});
        s["first_failure"] = ff;
    }
    return s;
}

inline json scenario_json(const ScenarioResult& s) {
    json j;
    j["id"] = s.id;
    j["passed"] = s.passed();
    if (s.error) j["error"] = *s.error;
    j["checks"] = json::array();
    for (const auto& c : s.checks) {
        json cj = {{"check", to_string(c.check)}, {"passed", c.passed}, {"detail", c.detail}};
        json m = json::object();
        for (const auto& metric : c.metrics) m[metric.name] = num(metric.value);
        cj["metrics"] = m;
        j["checks"].push_back(cj);
    }
    const auto cmp = [](const ComparisonRow& r) {
        return json{{"c", r.c},     {"set_size", r.set_size}, {"set_proper", r.set_proper}, {"lhs", r.lhs},
                    {"rhs", r.rhs}, {"margin", r.margin},     {"verdict", r.verdict}};
    };
    for (const auto& r : s.structural)
        j["structural"].push_back({{"weight", r.weight},
                                   {"rank", r.rank},
                                   {"trace_defect", num(r.trace_defect)},
                                   {"orthonormality_defect", num(r.orthonormality_defect)},
                                   {"reproducing_residual", num(r.reproducing_residual)},
                                   {"min_eig_rel", num(r.min_eig_rel)},
                                   {"shift_defect", num(r.shift_defect)}});
    for (const auto& r : s.comparison) j["comparison"].push_back(cmp(r));
    for (const auto& r : s.sweep) j["sweep"].push_back(cmp(r));
    for (const auto& r : s.homotopy)
        j["homotopy"].push_back({{"t", r.t},
                                 {"G", num(r.g)},
                                 {"rhs26", num(r.rhs26)},
                                 {"rhs27", num(r.rhs27)},
                                 {"rhs28", num(r.rhs28)},
                                 {"fd", num(r.fd)},
                                 {"fd_step", r.fd_step},
                                 {"max_pairwise_dev", num(r.max_pairwise_dev)}});
    for (const auto& r : s.tcz)
        j["tcz"].push_back({{"k", r.k},
                            {"degree", r.degree},
                            {"n_eval_points", r.n_eval_points},
                            {"max_abs_dev", num(r.max_abs_dev)},
                            {"mean_abs_dev", num(r.mean_abs_dev)}});
    for (const auto& r : s.maxprinciple)
        j["maxprinciple"].push_back({{"omega_size", r.omega_size},
                                     {"density_premise", r.density_premise},
                                     {"boundary_premise", r.boundary_premise},
                                     {"verdict", r.verdict},
                                     {"witness", r.witness}});
    return j;
}

inline std::string failure_file_name(const std::string& id) {
    std::string safe;
    for (const char ch : id) safe += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
    return "failure_" + safe + ".json";
}

} // namespace detail

/// The whole report as one document (no timings).
inline json report_json(const RunReport& r) {
    json j = detail::summary_json(r);
    j["results"] = json::array();
    for (const auto& s : r.scenarios) j["results"].push_back(detail::scenario_json(s));
    return j;
}

/// Writes the report under out_dir and returns the files written.
/// csv: summary.json, checks.csv, metrics.csv and one CSV per executed suite.
/// json: report.json. Both: timings.csv and one re-runnable dump per failed scenario.
/// With no executed checks only the summary (or report.json) is written.
inline std::vector<std::filesystem::path> emit_report(const RunReport& r, ReportFormat format,
                                                      const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    using detail::csv_line;
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    const bool any_checks =
        std::any_of(r.scenarios.begin(), r.scenarios.end(), [](const ScenarioResult& s) { return !s.checks.empty(); });
    const auto open = [&](const std::string& name) {
        written.push_back(out_dir / name);
        return detail::Sink(written.back());
    };

    if (format == ReportFormat::json) {
        open("report.json") << report_json(r).dump(2) << "\n";
    } else {
        open("summary.json") << detail::summary_json(r).dump(2) << "\n";
        if (any_checks) {
            auto checks = open("checks.csv");
            auto metrics = open("metrics.csv");
            checks << "scenario_id,check,passed,detail\n";
            metrics << "scenario_id,check,metric,value\n";
            for (const auto& s : r.scenarios) {
                if (s.error) checks << csv_line(s.id, std::string("error"), false, *s.error);
                for (const auto& c : s.checks) {
                    checks << csv_line(s.id, std::string(to_string(c.check)), c.passed, c.detail);
                    for (const auto& m : c.metrics) metrics << csv_line(s.id, std::string(to_string(c.check)), m.name, m.value);
                }
            }
        }
        if (r.has(Check::structural)) {
            auto f = open("structural.csv");
            f << "scenario_id,weight,rank,trace_defect,orthonormality_defect,reproducing_residual,min_eig_rel,shift_defect\n";
            for (const auto& s : r.scenarios)
                for (const auto& x : s.structural)
                    f << csv_line(x.scenario_id, x.weight, x.rank, x.trace_defect, x.orthonormality_defect,
                                  x.reproducing_residual, x.min_eig_rel, x.shift_defect);
        }
        const auto comparison_file = [&](const std::string& name, auto member) {
            auto f = open(name);
            f << "scenario_id,c,set_size,set_proper,lhs,rhs,margin,verdict\n";
            for (const auto& s : r.scenarios)
                for (const auto& x : s.*member)
                    f << csv_line(x.scenario_id, x.c, x.set_size, x.set_proper, x.lhs, x.rhs, x.margin, x.verdict);
        };
        if (r.has(Check::comparison)) comparison_file("comparison.csv", &ScenarioResult::comparison);
        if (r.has(Check::sweep)) comparison_file("sweep.csv", &ScenarioResult::sweep);
        if (r.has(Check::homotopy)) {
            auto f = open("homotopy.csv");
            f << "scenario_id,t,G,rhs26,rhs27,rhs28,fd,fd_step,max_pairwise_dev\n";
            for (const auto& s : r.scenarios)
                for (const auto& x : s.homotopy)
                    f << csv_line(x.scenario_id, x.t, x.g, x.rhs26, x.rhs27, x.rhs28, x.fd, x.fd_step, x.max_pairwise_dev);
        }
        if (r.has(Check::tcz)) {
            auto f = open("tcz.csv");
            f << "scenario_id,k,degree,n_eval_points,max_abs_dev,mean_abs_dev\n";
            for (const auto& s : r.scenarios)
                for (const auto& x : s.tcz)
                    f << csv_line(x.scenario_id, x.k, x.degree, x.n_eval_points, x.max_abs_dev, x.mean_abs_dev);
        }
        if (r.has(Check::maxprinciple)) {
            auto f = open("maxprinciple.csv");
            f << "scenario_id,omega_size,density_premise,boundary_premise,verdict,witness\n";
            for (const auto& s : r.scenarios)
                for (const auto& x : s.maxprinciple)
                    f << csv_line(x.scenario_id, x.omega_size, x.density_premise, x.boundary_premise, x.verdict, x.witness);
        }
    }

    if (any_checks) {
        auto f = open("timings.csv");
        f << "scenario_id,check,seconds\n";
        for (const auto& s : r.scenarios)
            for (const auto& c : s.checks) f << csv_line(s.id, std::string(to_string(c.check)), c.seconds);
    }
    for (const auto& s : r.scenarios)
        if (s.failure_dump) open(detail::failure_file_name(s.id)) << s.failure_dump->dump(2) << "\n";
    return written;
}

} // namespace bergman::harness
