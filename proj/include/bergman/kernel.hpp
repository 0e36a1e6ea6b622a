#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bergman/error.hpp"
#include "bergman/measure.hpp"
#include "bergman/span.hpp"
#include "bergman/types.hpp"
#include "bergman/weight.hpp"

namespace bergman {

inline constexpr double default_rank_tol = 1e-12;

namespace detail {

/// sqrt(w_j e^{-phi_j}) for nodes [begin, begin + count)
inline RVector root_density(const QuadratureMeasure& measure, const RVector* phi, Index begin, Index count) {
    RVector s(count);
    for (Index r = 0; r < count; ++r) {
        const double e = phi ? std::exp(-0.5 * (*phi)(begin + r)) : 1.0;
        s(r) = std::sqrt(measure.mass(begin + r)) * e;
    }
    return s;
}

inline void make_hermitian(CMatrix& m) {
    m = (0.5 * (m + m.adjoint())).eval();
}

/// Sum over node chunks of values_fn(chunk)^* W values_fn(chunk), W = diag(w e^{-phi}).
template <typename ValuesFn>
CMatrix weighted_gram(const QuadratureMeasure& measure, const RVector* phi, Index cols, ValuesFn&& values_fn) {
    CMatrix g = CMatrix::Zero(cols, cols);
    if (cols == 0) return g;
    for (Index begin = 0; begin < measure.size(); begin += node_chunk) {
        const Index count = std::min(node_chunk, measure.size() - begin);
        const RVector s = root_density(measure, phi, begin, count);
        const CMatrix scaled = s.asDiagonal() * values_fn(begin, count);
        g.selfadjointView<Eigen::Lower>().rankUpdate(scaled.adjoint());
    }
    g.triangularView<Eigen::StrictlyUpper>() = g.adjoint();
    make_hermitian(g);
    return g;
}

} // namespace detail

/// G_mn = sum_j conj(V_jm) V_jn w_j e^{-phi_j}, symmetrized.
inline CMatrix assemble_gram(const FunctionSpan& span, const QuadratureMeasure& measure, const WeightFunction& weight) {
    span.check_compatible(measure);
    if (weight.size() != measure.size())
        throw dimension_mismatch("weight has " + std::to_string(weight.size()) + " values, measure has " +
                                 std::to_string(measure.size()) + " nodes");
    return detail::weighted_gram(measure, &weight.values(), span.dim(),
                                 [&](Index b, Index c) { return span.values(measure, b, c); });
}

struct OrthonormalBasis {
    CMatrix coeffs;       // d x rank, coeffs^* G coeffs = I
    Index rank = 0;
    RVector eigenvalues;  // retained eigenvalues of the equilibrated Gram, descending
    double condition = 1.0;
};

/// Orthonormal coefficients for the range of a Hermitian PSD Gram matrix.
///
/// The Gram matrix is first equilibrated, D G D with D = diag(G)^{-1/2}, so that
/// spans whose basis functions have wildly different norms (high-degree monomials
/// against steep weights) are not truncated for scale alone. Eigenvalues of the
/// equilibrated matrix at or below tol_rel * lambda_max are discarded. A zero
/// Gram matrix yields rank 0.
inline OrthonormalBasis orthonormal_basis(const CMatrix& gram, double tol_rel = default_rank_tol) {
    const Index d = gram.rows();
    if (gram.cols() != d) throw dimension_mismatch("Gram matrix must be square");
    OrthonormalBasis out;
    out.coeffs = CMatrix::Zero(d, 0);
    if (d == 0) return out;

    RVector scale(d);
    for (Index m = 0; m < d; ++m) {
        const double g = gram(m, m).real();
        scale(m) = (g > 0.0 && std::isfinite(g)) ? 1.0 / std::sqrt(g) : 0.0;
    }
    if (scale.maxCoeff() == 0.0) return out;

    CMatrix eq = scale.asDiagonal() * gram * scale.asDiagonal();
    detail::make_hermitian(eq);
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(eq);
    if (eig.info() != Eigen::Success) throw error("Hermitian eigensolver failed to converge");

    const RVector& lambda = eig.eigenvalues();  // ascending
    const double lambda_max = lambda(d - 1);
    if (!(lambda_max > 0.0)) return out;

    Index keep = 0;
    while (keep < d && lambda(d - 1 - keep) > tol_rel * lambda_max) ++keep;

    out.rank = keep;
    out.coeffs.resize(d, keep);
    out.eigenvalues.resize(keep);
    for (Index k = 0; k < keep; ++k) {
        const Index src = d - 1 - k;
        out.eigenvalues(k) = lambda(src);
        out.coeffs.col(k) = scale.asDiagonal() * eig.eigenvectors().col(src) / std::sqrt(lambda(src));
    }
    out.condition = keep > 0 ? lambda_max / out.eigenvalues(keep - 1) : 1.0;
    return out;
}

struct PivotedCholesky {
    std::vector<Index> pivots;  // selected columns, in pivot order
    CMatrix lower;              // rank x rank, G[piv, piv] = lower * lower^*
};

/// Rank-revealing Cholesky with diagonal pivoting. Stops once the largest
/// remaining residual pivot is at or below tol_rel times the largest diagonal
/// entry; the pivots then index a well-conditioned subset of columns spanning
/// the numerical range.
inline PivotedCholesky pivoted_cholesky(const CMatrix& g, double tol_rel) {
    const Index d = g.rows();
    PivotedCholesky out;
    if (d == 0) {
        out.lower = CMatrix::Zero(0, 0);
        return out;
    }
    RVector residual = g.diagonal().real();
    const double top = residual.maxCoeff();
    CMatrix l = CMatrix::Zero(d, d);  // rows in original order
    std::vector<char> used(static_cast<std::size_t>(d), 0);
    if (top > 0.0) {
        for (Index k = 0; k < d; ++k) {
            Index p = -1;
            double best = 0.0;
            for (Index m = 0; m < d; ++m)
                if (!used[static_cast<std::size_t>(m)] && residual(m) > best) {
                    best = residual(m);
                    p = m;
                }
            if (p < 0 || best <= tol_rel * top) break;
            used[static_cast<std::size_t>(p)] = 1;
            const double root = std::sqrt(best);
            for (Index m = 0; m < d; ++m) {
                if (used[static_cast<std::size_t>(m)] && m != p) continue;
                cplx v = g(m, p);
                for (Index j = 0; j < k; ++j) v -= l(m, j) * std::conj(l(p, j));
                l(m, k) = v / root;
            }
            for (Index m = 0; m < d; ++m)
                if (!used[static_cast<std::size_t>(m)]) residual(m) -= std::norm(l(m, k));
            out.pivots.push_back(p);
        }
    }
    const Index r = static_cast<Index>(out.pivots.size());
    out.lower.resize(r, r);
    for (Index i = 0; i < r; ++i) out.lower.row(i) = l.row(out.pivots[static_cast<std::size_t>(i)]).head(r);
    return out;
}

/// A span restricted to the nodes of a measure, together with the
/// weight-independent choice of basis columns that spans its numerical range.
/// The rank decision is made once here, so every weight built on the same
/// frame sees the same subspace. Cheap to copy.
class SpanFrame {
public:
    SpanFrame(FunctionSpan span, QuadratureMeasure measure, double tol_rel = default_rank_tol) {
        span.check_compatible(measure);
        const CMatrix g0 = detail::weighted_gram(measure, nullptr, span.dim(),
                                                 [&](Index b, Index c) { return span.values(measure, b, c); });
        init(std::move(span), std::move(measure), g0, tol_rel);
    }

    /// Same, reusing a precomputed unit-weight Gram matrix of the span (or of any
    /// span whose leading columns coincide with it).
    SpanFrame(FunctionSpan span, QuadratureMeasure measure, const CMatrix& unit_gram, double tol_rel) {
        span.check_compatible(measure);
        if (unit_gram.rows() < span.dim() || unit_gram.cols() < span.dim())
            throw dimension_mismatch("unit Gram smaller than the span");
        const Index d = span.dim();
        init(std::move(span), std::move(measure), unit_gram.topLeftCorner(d, d), tol_rel);
    }

    [[nodiscard]] const FunctionSpan& span() const noexcept { return data_->span; }
    [[nodiscard]] const QuadratureMeasure& measure() const noexcept { return data_->measure; }
    /// d x rank selection of basis columns, each scaled to unit norm under the unit weight.
    [[nodiscard]] const CMatrix& reference_coeffs() const noexcept { return data_->reference; }
    [[nodiscard]] Index rank() const noexcept { return data_->reference.cols(); }
    [[nodiscard]] double tol_rel() const noexcept { return data_->tol_rel; }

    /// Monomials on a disk rule: restrictions of holomorphic functions to a
    /// discretized domain with a positive continuous density.
    [[nodiscard]] bool holomorphic_domain() const noexcept {
        return span().kind() == SpanKind::monomials && measure().kind() == MeasureKind::disk_product;
    }

    [[nodiscard]] WeightFunction tabulate(const WeightFunction& w) const { return eval_weight(w, measure()); }

private:
    struct Data {
        FunctionSpan span;
        QuadratureMeasure measure;
        std::vector<Index> columns;
        RVector column_scale;
        CMatrix reference;
        double tol_rel = default_rank_tol;
    };

    void init(FunctionSpan span, QuadratureMeasure measure, const CMatrix& g0, double tol_rel) {
        auto data = std::make_shared<Data>();
        data->span = std::move(span);
        data->measure = std::move(measure);
        data->tol_rel = tol_rel;
        const Index d = data->span.dim();

        // The rank decision is a column-subset selection on the equilibrated
        // unit-weight Gram. No rotation or elimination is applied: weights may
        // rescale basis functions by many orders of magnitude, and any mixing
        // done here would be amplified by them.
        RVector scale(d);
        for (Index m = 0; m < d; ++m) {
            const double gm = g0(m, m).real();
            scale(m) = gm > 0.0 ? 1.0 / std::sqrt(gm) : 0.0;
        }
        const CMatrix eq = scale.asDiagonal() * g0 * scale.asDiagonal();
        data->columns = pivoted_cholesky(eq, tol_rel).pivots;
        std::sort(data->columns.begin(), data->columns.end());
        const Index r = static_cast<Index>(data->columns.size());
        data->column_scale.resize(r);
        data->reference = CMatrix::Zero(d, r);
        for (Index k = 0; k < r; ++k) {
            const Index c = data->columns[static_cast<std::size_t>(k)];
            data->column_scale(k) = scale(c);
            data->reference(c, k) = scale(c);
        }
        data_ = std::move(data);
    }

    /// reference-frame values at nodes [begin, begin + count): selected columns, rescaled
    [[nodiscard]] CMatrix reference_values(Index begin, Index count) const {
        const CMatrix v = span().values(measure(), begin, count);
        return v(Eigen::all, data_->columns) * data_->column_scale.asDiagonal();
    }

    std::shared_ptr<const Data> data_;

    friend class WeightedSpace;
};

/// The Hilbert space spanned by the frame with inner product sum_j w_j h_j conj(g_j) e^{-phi_j}.
class WeightedSpace {
public:
    /// Re-orthonormalization passes are repeated while the equilibrated Gram of
    /// the current frame is worse conditioned than this.
    static constexpr double refine_condition = 1e4;

    WeightedSpace(SpanFrame frame, const WeightFunction& weight)
        : frame_(std::move(frame)), weight_(frame_.tabulate(weight)) {
        const auto& sp = frame_.span();
        const auto& mu = frame_.measure();
        coeffs_ = frame_.reference_coeffs();
        const double zero_tol = 16.0 * std::numeric_limits<double>::epsilon() * std::max<Index>(1, coeffs_.cols());
        for (int pass = 0; pass < 3 && coeffs_.cols() > 0; ++pass) {
            const CMatrix h = detail::weighted_gram(mu, &weight_.values(), coeffs_.cols(), [&](Index b, Index c) {
                return pass == 0 ? frame_.reference_values(b, c) : CMatrix(sp.values(mu, b, c) * coeffs_);
            });
            const OrthonormalBasis ob = orthonormal_basis(h, zero_tol);
            coeffs_ = (coeffs_ * ob.coeffs).eval();
            if (ob.condition <= refine_condition) break;
        }
    }

    [[nodiscard]] const SpanFrame& frame() const noexcept { return frame_; }
    [[nodiscard]] const QuadratureMeasure& measure() const noexcept { return frame_.measure(); }
    [[nodiscard]] const FunctionSpan& span() const noexcept { return frame_.span(); }
    [[nodiscard]] const WeightFunction& weight() const noexcept { return weight_; }
    [[nodiscard]] const CMatrix& coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] Index rank() const noexcept { return coeffs_.cols(); }
    [[nodiscard]] Index size() const noexcept { return measure().size(); }

    [[nodiscard]] CMatrix gram() const { return assemble_gram(span(), measure(), weight_); }

    /// Orthonormal basis values e_i(z_j) for nodes [begin, begin + count).
    [[nodiscard]] CMatrix features(Index begin, Index count) const {
        return span().values(measure(), begin, count) * coeffs_;
    }
    [[nodiscard]] CMatrix features() const { return features(0, size()); }

    [[nodiscard]] CRowVector features_at(cplx z) const { return span().evaluate(z) * coeffs_; }

    /// max |E^* W E - I| over the node values actually used for kernels.
    [[nodiscard]] double orthonormality_defect() const {
        if (rank() == 0) return 0.0;
        const CMatrix h = detail::weighted_gram(measure(), &weight_.values(), rank(),
                                                [&](Index b, Index c) { return features(b, c); });
        return (h - CMatrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
    }

private:
    SpanFrame frame_;
    WeightFunction weight_;
    CMatrix coeffs_;
};

struct KernelMatrix {
    CMatrix values;  // K(z_i, z_j)
    Index rank = 0;
};

struct BergmanDensity {
    RVector values;  // K(z_j, z_j) e^{-phi_j}
};

/// Dense K = (V C)(V C)^* on all node pairs.
inline KernelMatrix kernel_matrix(const WeightedSpace& space) {
    const CMatrix f = space.features();
    KernelMatrix k{f * f.adjoint(), space.rank()};
    detail::make_hermitian(k.values);
    k.values.diagonal() = k.values.diagonal().real().cast<cplx>();
    return k;
}

/// K(z, zeta) at arbitrary points (monomial spans).
inline cplx kernel_at(const WeightedSpace& space, cplx z, cplx zeta) {
    if (space.rank() == 0) return 0.0;
    return (space.features_at(z) * space.features_at(zeta).adjoint())(0, 0);
}

/// K(z_j, z_j) for the listed nodes, without forming the dense kernel.
inline RVector kernel_diagonal(const WeightedSpace& space, const std::vector<Index>& nodes) {
    RVector out(static_cast<Index>(nodes.size()));
    if (space.rank() == 0) {
        out.setZero();
        return out;
    }
    const auto& mu = space.measure();
    for (std::size_t begin = 0; begin < nodes.size(); begin += node_chunk) {
        const std::size_t count = std::min<std::size_t>(node_chunk, nodes.size() - begin);
        CMatrix v(static_cast<Index>(count), space.span().dim());
        for (std::size_t r = 0; r < count; ++r) v.row(static_cast<Index>(r)) = space.span().values(mu, nodes[begin + r], 1);
        const CMatrix f = v * space.coeffs();
        out.segment(static_cast<Index>(begin), static_cast<Index>(count)) = f.rowwise().squaredNorm();
    }
    return out;
}

/// K(z_j, z_j) on every node, streamed in chunks.
inline RVector kernel_diagonal(const WeightedSpace& space) {
    RVector out = RVector::Zero(space.size());
    if (space.rank() == 0) return out;
    for (Index begin = 0; begin < space.size(); begin += node_chunk) {
        const Index count = std::min(node_chunk, space.size() - begin);
        out.segment(begin, count) = space.features(begin, count).rowwise().squaredNorm();
    }
    return out;
}

inline BergmanDensity bergman_density(const KernelMatrix& kernel, const WeightFunction& weight,
                                      const QuadratureMeasure& measure) {
    const Index m = measure.size();
    if (kernel.values.rows() != m || weight.size() != m) throw dimension_mismatch("bergman_density: node counts differ");
    BergmanDensity b;
    b.values = kernel.values.diagonal().real().array() * (-weight.values().array()).exp();
    return b;
}

inline BergmanDensity bergman_density(const WeightedSpace& space) {
    return {kernel_diagonal(space).array() * (-space.weight().values().array()).exp()};
}

/// sum_j w_j B_j; equals the rank of the space.
inline double density_mass(const BergmanDensity& b, const QuadratureMeasure& measure) {
    return measure.masses().dot(b.values);
}

/// max_ij | sum_k K_ik K_kj w_k e^{-phi_k} - K_ij |
inline double reproducing_residual(const KernelMatrix& kernel, const WeightFunction& weight,
                                   const QuadratureMeasure& measure) {
    const Index m = measure.size();
    if (kernel.values.rows() != m || weight.size() != m) throw dimension_mismatch("reproducing_residual: node counts differ");
    if (m == 0) return 0.0;
    const RVector w = measure.masses().array() * (-weight.values().array()).exp();
    const CMatrix r = kernel.values * w.asDiagonal() * kernel.values - kernel.values;
    return r.cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of K relative to the largest (0 for the zero kernel).
inline double kernel_min_eigen_relative(const KernelMatrix& kernel) {
    if (kernel.values.rows() == 0) return 0.0;
    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(kernel.values, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) return 0.0;
    return eig.eigenvalues().minCoeff() / top;
}

struct MonotonicityResult {
    bool holds = true;
    Index first_violation = -1;
    double worst_excess = 0.0;  // max_j K1_jj - K2_jj - tol_j
};

/// Extremal monotonicity: phi1 <= phi2 at every node implies K_phi1(z,z) <= K_phi2(z,z).
/// Both spaces must share span and measure.
inline MonotonicityResult kernel_monotonicity_check(const WeightedSpace& space1, const WeightedSpace& space2,
                                                    double tol_scale = 1.0) {
    if (space1.size() != space2.size()) throw dimension_mismatch("kernel_monotonicity_check: node counts differ");
    const RVector& p1 = space1.weight().values();
    const RVector& p2 = space2.weight().values();
    for (Index j = 0; j < p1.size(); ++j)
        if (p1(j) > p2(j))
            throw precondition_error("kernel_monotonicity_check: phi1 > phi2 at node " + std::to_string(j), j);
    const RVector k1 = kernel_diagonal(space1);
    const RVector k2 = kernel_diagonal(space2);
    MonotonicityResult res;
    res.worst_excess = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < k1.size(); ++j) {
        const double excess = k1(j) - k2(j) - tol_scale * 1e-12 * (1.0 + k2(j));
        res.worst_excess = std::max(res.worst_excess, excess);
        if (excess > 0.0 && res.holds) {
            res.holds = false;
            res.first_violation = j;
        }
    }
    return res;
}

} // namespace bergman
