#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/measure.hpp"
#include "bergman/types.hpp"

namespace bergman {

namespace family {

struct Constant {
    double c = 0.0;
};

/// a |z|^2
struct Gauss {
    double a = 1.0;
};

/// sum_m coeffs[m] |z|^(2m), m = 0, 1, ...
struct RadialPoly {
    std::vector<double> coeffs;
};

/// b Re(z^2)
struct Harmonic {
    double b = 1.0;
};

} // namespace family

using WeightFamily = std::variant<family::Constant, family::Gauss, family::RadialPoly, family::Harmonic>;

inline std::string family_name(const WeightFamily& f) {
    struct {
        std::string operator()(const family::Constant&) const { return "constant"; }
        std::string operator()(const family::Gauss&) const { return "gauss"; }
        std::string operator()(const family::RadialPoly&) const { return "radial-poly"; }
        std::string operator()(const family::Harmonic&) const { return "harmonic"; }
    } visitor;
    return std::visit(visitor, f);
}

inline double evaluate(const WeightFamily& f, cplx z) {
    const double r2 = std::norm(z);
    struct {
        cplx z;
        double r2;
        double operator()(const family::Constant& c) const { return c.c; }
        double operator()(const family::Gauss& g) const { return g.a * r2; }
        double operator()(const family::RadialPoly& p) const {
            double acc = 0.0;
            for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * r2 + *it;
            return acc;
        }
        double operator()(const family::Harmonic& h) const { return h.b * (z * z).real(); }
    } visitor{z, r2};
    return std::visit(visitor, f);
}

/// Euclidean Laplacian d^2/dx^2 + d^2/dy^2.
inline double laplacian(const WeightFamily& f, cplx z) {
    const double r2 = std::norm(z);
    struct {
        double r2;
        double operator()(const family::Constant&) const { return 0.0; }
        double operator()(const family::Gauss& g) const { return 4.0 * g.a; }
        double operator()(const family::RadialPoly& p) const {
            // Lap |z|^(2m) = 4 m^2 |z|^(2m-2)
            double acc = 0.0;
            for (std::size_t m = p.coeffs.size(); m-- > 1;) acc = acc * r2 + 4.0 * double(m * m) * p.coeffs[m];
            return acc;
        }
        double operator()(const family::Harmonic&) const { return 0.0; }
    } visitor{r2};
    return std::visit(visitor, f);
}

inline WeightFamily scale_family(const WeightFamily& f, double k) {
    struct {
        double k;
        WeightFamily operator()(const family::Constant& c) const { return family::Constant{k * c.c}; }
        WeightFamily operator()(const family::Gauss& g) const { return family::Gauss{k * g.a}; }
        WeightFamily operator()(family::RadialPoly p) const {
            for (double& a : p.coeffs) a *= k;
            return p;
        }
        WeightFamily operator()(const family::Harmonic& h) const { return family::Harmonic{k * h.b}; }
    } visitor{k};
    return std::visit(visitor, f);
}

/// A weight phi tabulated on the nodes of a measure, optionally remembering
/// the closed form it came from (which carries an analytic Laplacian).
class WeightFunction {
public:
    WeightFunction() = default;

    /// Tabulated-only weight.
    explicit WeightFunction(RVector values) : values_(std::move(values)) { validate(); }

    /// Closed-form weight, not yet tabulated; see eval_weight.
    explicit WeightFunction(WeightFamily family) : family_(std::move(family)) {}

    WeightFunction(RVector values, std::optional<WeightFamily> family)
        : values_(std::move(values)), family_(std::move(family)) {
        validate();
    }

    [[nodiscard]] const RVector& values() const noexcept { return values_; }
    [[nodiscard]] double operator()(Index j) const { return values_(j); }
    [[nodiscard]] Index size() const noexcept { return values_.size(); }
    [[nodiscard]] bool tabulated() const noexcept { return values_.size() > 0; }
    [[nodiscard]] const std::optional<WeightFamily>& family() const noexcept { return family_; }
    [[nodiscard]] bool has_laplacian() const noexcept { return family_.has_value(); }

    [[nodiscard]] double laplacian_at(cplx z) const {
        if (!family_) throw unsupported("weight has no closed-form Laplacian (tabulated-only)");
        return bergman::laplacian(*family_, z);
    }

    /// phi + c; keeps the closed form.
    [[nodiscard]] WeightFunction shifted(double c) const {
        std::optional<WeightFamily> f;
        if (family_) {
            if (const auto* cst = std::get_if<family::Constant>(&*family_)) {
                f = family::Constant{cst->c + c};
            } else if (const auto* g = std::get_if<family::Gauss>(&*family_)) {
                f = family::RadialPoly{{c, g->a}};
            } else if (const auto* rp = std::get_if<family::RadialPoly>(&*family_)) {
                auto p = *rp;
                if (p.coeffs.empty()) p.coeffs.push_back(0.0);
                p.coeffs[0] += c;
                f = p;
            }
            // harmonic + c is outside the enumeration: tabulated only
        }
        return WeightFunction(values_.array() + c, f);
    }

    /// k * phi; keeps the closed form.
    [[nodiscard]] WeightFunction scaled(double k) const {
        std::optional<WeightFamily> f;
        if (family_) f = scale_family(*family_, k);
        return WeightFunction(k * values_, f);
    }

private:
    void validate() const {
        for (Index j = 0; j < values_.size(); ++j)
            if (!std::isfinite(values_(j)))
                throw invalid_weight("weight value at node " + std::to_string(j) + " is not finite");
    }

    RVector values_;
    std::optional<WeightFamily> family_;
};

/// Tabulate `weight` on the nodes of `measure`. Idempotent for already
/// tabulated weights of the right size.
inline WeightFunction eval_weight(const WeightFunction& weight, const QuadratureMeasure& measure) {
    if (weight.family()) {
        RVector v(measure.size());
        for (Index j = 0; j < measure.size(); ++j) v(j) = evaluate(*weight.family(), measure.z(j));
        return WeightFunction(std::move(v), weight.family());
    }
    if (weight.size() != measure.size())
        throw dimension_mismatch("tabulated weight has " + std::to_string(weight.size()) + " values, measure has " +
                                 std::to_string(measure.size()) + " nodes");
    return weight;
}

inline WeightFunction eval_weight(const WeightFamily& family, const QuadratureMeasure& measure) {
    return eval_weight(WeightFunction(family), measure);
}

} // namespace bergman
