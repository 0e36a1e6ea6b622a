#pragma once

#include <string>

#include "bergman/error.hpp"
#include "bergman/measure.hpp"
#include "bergman/types.hpp"

namespace bergman {

enum class SpanKind { monomials, tabulated };

/// The fixed finite span of functions whose weighted L2 closure is the Hilbert
/// space. Monomial spans evaluate anywhere; tabulated spans only at the nodes
/// they were tabulated on.
class FunctionSpan {
public:
    /// 1, z, ..., z^max_degree
    static FunctionSpan monomials(int max_degree) {
        if (max_degree < 0) throw invalid_configuration("monomial span: degree must be >= 0");
        FunctionSpan s;
        s.kind_ = SpanKind::monomials;
        s.dim_ = max_degree + 1;
        return s;
    }

    /// rows = nodes, columns = basis functions
    static FunctionSpan tabulated(CMatrix values) {
        if (values.cols() < 1) throw invalid_configuration("tabulated span needs at least one basis function");
        if (!values.allFinite()) throw invalid_configuration("tabulated span contains non-finite entries");
        FunctionSpan s;
        s.kind_ = SpanKind::tabulated;
        s.dim_ = values.cols();
        s.values_ = std::move(values);
        return s;
    }

    [[nodiscard]] SpanKind kind() const noexcept { return kind_; }
    [[nodiscard]] Index dim() const noexcept { return dim_; }
    [[nodiscard]] int max_degree() const noexcept { return static_cast<int>(dim_) - 1; }
    [[nodiscard]] bool has_evaluator() const noexcept { return kind_ == SpanKind::monomials; }
    [[nodiscard]] const CMatrix& tabulated_values() const noexcept { return values_; }

    /// Throws dimension_mismatch unless the span can be evaluated on every node of `measure`.
    void check_compatible(const QuadratureMeasure& measure) const {
        if (kind_ == SpanKind::tabulated && values_.rows() != measure.size())
            throw dimension_mismatch("tabulated span has " + std::to_string(values_.rows()) +
                                     " rows, measure has " + std::to_string(measure.size()) + " nodes");
    }

    /// Basis values at nodes [begin, begin + count) of `measure`.
    [[nodiscard]] CMatrix values(const QuadratureMeasure& measure, Index begin, Index count) const {
        if (kind_ == SpanKind::tabulated) return values_.middleRows(begin, count);
        CMatrix out(count, dim_);
        for (Index r = 0; r < count; ++r) out.row(r) = evaluate(measure.z(begin + r));
        return out;
    }

    [[nodiscard]] CMatrix values(const QuadratureMeasure& measure) const { return values(measure, 0, measure.size()); }

    /// Row of basis values at an arbitrary point (monomial spans only).
    [[nodiscard]] CRowVector evaluate(cplx z) const {
        if (!has_evaluator()) throw unsupported("tabulated span cannot be evaluated off its nodes");
        CRowVector row(dim_);
        cplx p = 1.0;
        for (Index m = 0; m < dim_; ++m) {
            row(m) = p;
            p *= z;
        }
        return row;
    }

private:
    SpanKind kind_ = SpanKind::monomials;
    Index dim_ = 1;
    CMatrix values_;
};

} // namespace bergman
