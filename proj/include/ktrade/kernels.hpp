// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

///
/// \file kernels.hpp
///
/// Kernel evaluation, Gram assembly, median-heuristic bandwidths, centering
/// and rank-revealing (pivoted) Cholesky factorization.
///
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ktrade/common.hpp"

namespace ktrade
{

enum class KernelFamily
{
    RbfGaussian,
    Linear,
    OneHotDelta,
};

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec
{
    KernelFamily family = KernelFamily::RbfGaussian;
    /// Only read for RbfGaussian: k(x, x') = exp(-|x - x'|^2 / (2 bandwidth^2)).
    double bandwidth = 1.0;
    Index input_dim = 1;

    /// Throws ValidationError when the invariants do not hold.
    void validate() const;

    static KernelSpec rbf(double bandwidth, Index input_dim)
    {
        return {KernelFamily::RbfGaussian, bandwidth, input_dim};
    }
    static KernelSpec linear(Index input_dim) { return {KernelFamily::Linear, 1.0, input_dim}; }
    /// Categorical codes stored in a single column.
    static KernelSpec one_hot_delta() { return {KernelFamily::OneHotDelta, 1.0, 1}; }
};

enum class FactorSource
{
    ExactCholesky,
    RffDirect,
};

/// Full-column-rank L with K ~ L L^T; rows follow the sample order.
template <typename Scalar>
struct GramFactor
{
    Matrix<Scalar> factor;
    FactorSource source = FactorSource::ExactCholesky;

    Index rows() const { return factor.rows(); }
    Index rank() const { return factor.cols(); }
};

using GramFactord = GramFactor<double>;

/// Pivot truncation threshold relative to the largest Gram diagonal.
inline constexpr double kDefaultCholeskyTol = 1e-9;
/// Acceptance threshold on max |L L^T - K| for exact factorizations.
inline constexpr double kCholeskyReconstructionTol = 1e-7;

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar kernel_value(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    switch (spec.family)
    {
    case KernelFamily::RbfGaussian:
    {
        const Scalar sq = (a - b).squaredNorm();
        return std::exp(-sq / (Scalar(2) * Scalar(spec.bandwidth) * Scalar(spec.bandwidth)));
    }
    case KernelFamily::Linear:
        return a.dot(b);
    case KernelFamily::OneHotDelta:
        return a(0) == b(0) ? Scalar(1) : Scalar(0);
    }
    return Scalar(0);
}

namespace detail
{
template <typename Derived>
void check_points(const Eigen::MatrixBase<Derived>& points, const KernelSpec& spec, const char* what)
{
    spec.validate();
    if (points.cols() != spec.input_dim)
    {
        throw ValidationError(std::string(what) + ": point dimension " + std::to_string(points.cols()) +
                              " does not match kernel input_dim " + std::to_string(spec.input_dim));
    }
    if (!points.allFinite())
    {
        throw ValidationError(std::string(what) + ": non-finite input entries");
    }
}
} // namespace detail

/// K_ij = k(x_i, x_j). Each pair is evaluated once and mirrored, so the
/// result is exactly symmetric.
template <typename Derived>
Matrix<typename Derived::Scalar> gram_matrix(const Eigen::MatrixBase<Derived>& points, const KernelSpec& spec)
{
    using Scalar = typename Derived::Scalar;
    detail::check_points(points, spec, "gram_matrix");
    const Index n = points.rows();
    if (n < 1)
    {
        throw ValidationError("gram_matrix: need at least one point");
    }
    Matrix<Scalar> gram(n, n);
    for (Index j = 0; j < n; ++j)
    {
        for (Index i = j; i < n; ++i)
        {
            const Scalar v = kernel_value(spec, points.row(i), points.row(j));
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return gram;
}

/// Cross Gram K_ij = k(a_i, b_j).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> cross_gram(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                             const KernelSpec& spec)
{
    using Scalar = typename DerivedA::Scalar;
    detail::check_points(a, spec, "cross_gram");
    detail::check_points(b, spec, "cross_gram");
    Matrix<Scalar> out(a.rows(), b.rows());
    for (Index j = 0; j < b.rows(); ++j)
    {
        for (Index i = 0; i < a.rows(); ++i)
        {
            out(i, j) = kernel_value(spec, a.row(i), b.row(j));
        }
    }
    return out;
}

/// Fallback bandwidth when every pairwise distance is zero.
inline constexpr double kDegenerateBandwidth = 1.0;

/// Median of all n(n-1)/2 pairwise Euclidean distances (mean of the two
/// middle values for an even count).
template <typename Derived>
typename Derived::Scalar median_bandwidth(const Eigen::MatrixBase<Derived>& points)
{
    using Scalar = typename Derived::Scalar;
    const Index n = points.rows();
    if (n < 2)
    {
        throw ValidationError("median_bandwidth: need at least two points, got " + std::to_string(n));
    }
    if (!points.allFinite())
    {
        throw ValidationError("median_bandwidth: non-finite input entries");
    }
    std::vector<Scalar> dist;
    dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (Index i = 0; i < n; ++i)
    {
        for (Index j = i + 1; j < n; ++j)
        {
            dist.push_back((points.row(i) - points.row(j)).norm());
        }
    }
    const std::size_t m = dist.size();
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    Scalar median = *mid;
    if (m % 2 == 0)
    {
        const Scalar lower = *std::max_element(dist.begin(), mid);
        median = (median + lower) / Scalar(2);
    }
    return median > Scalar(0) ? median : Scalar(kDegenerateBandwidth);
}

/// H M = M - (1/n) 1 (1^T M), without forming H.
template <typename Derived>
Matrix<typename Derived::Scalar> center_factor(const Eigen::MatrixBase<Derived>& factor)
{
    using Scalar = typename Derived::Scalar;
    if (factor.rows() == 0)
    {
        return Matrix<Scalar>(factor.rows(), factor.cols());
    }
    const Vector<Scalar> mean = factor.colwise().mean().transpose();
    return factor.rowwise() - mean.transpose();
}

/// Pivoted Cholesky driven by a column oracle.
///
/// `diag` holds K_ii and `column(j, out)` writes K(:, j) into `out`. Pivoting
/// stops once the largest residual diagonal drops to `tol * max(diag)` or
/// `max_rank` columns are built. Only the selected columns are evaluated, so
/// memory stays O(n * rank). A residual diagonal below -tol * max(diag)
/// signals an indefinite input.
///
/// Candidates are taken `block` at a time (largest residual diagonals, ties
/// to the lower index) and brought up to date with one matrix product; the
/// pivots inside a block are then chosen greedily. This keeps the update
/// compute-bound instead of one pass over the whole factor per pivot.
template <typename Scalar>
Matrix<Scalar> pivoted_cholesky(Vector<Scalar> diag, const std::function<void(Index, Vector<Scalar>&)>& column,
                                Scalar tol, Index max_rank, Index block = 32)
{
    const Index n = diag.size();
    max_rank = std::min(max_rank, n);
    if (n == 0 || max_rank <= 0)
    {
        return Matrix<Scalar>(n, 0);
    }
    const Scalar scale = diag.maxCoeff();
    if (!(scale > Scalar(0)))
    {
        if (diag.minCoeff() < Scalar(0))
        {
            throw ValidationError("pivoted_cholesky: negative diagonal, matrix is not PSD");
        }
        return Matrix<Scalar>(n, 0);
    }
    const Scalar threshold = tol * scale;
    block = std::max<Index>(block, 1);
    std::vector<bool> pivoted(static_cast<std::size_t>(n), false);
    const auto is_pivoted = [&pivoted](Index i) { return pivoted[static_cast<std::size_t>(i)]; };
    // Grown on demand; the numerical rank is usually far below n.
    Matrix<Scalar> factor(n, std::min<Index>(max_rank, 64));
    Vector<Scalar> col(n);
    Matrix<Scalar> panel;
    std::vector<Index> cand;
    Index k = 0;
    while (k < max_rank)
    {
        cand.clear();
        for (Index i = 0; i < n; ++i)
        {
            if (!is_pivoted(i) && diag(i) > threshold)
            {
                cand.push_back(i);
            }
        }
        if (cand.empty())
        {
            break;
        }
        const auto by_residual = [&diag](Index a, Index b) { return diag(a) > diag(b) || (diag(a) == diag(b) && a < b); };
        const Index width = std::min<Index>({block, max_rank - k, static_cast<Index>(cand.size())});
        std::partial_sort(cand.begin(), cand.begin() + width, cand.end(), by_residual);
        cand.resize(static_cast<std::size_t>(width));

        panel.resize(n, width);
        for (Index t = 0; t < width; ++t)
        {
            column(cand[static_cast<std::size_t>(t)], col);
            panel.col(t) = col;
        }
        if (k > 0)
        {
            Matrix<Scalar> rows(width, k);
            for (Index t = 0; t < width; ++t)
            {
                rows.row(t) = factor.row(cand[static_cast<std::size_t>(t)]).head(k);
            }
            panel.noalias() -= factor.leftCols(k) * rows.transpose();
        }

        const Index k0 = k;
        std::vector<bool> used(static_cast<std::size_t>(width), false);
        while (k < max_rank)
        {
            Index pick = -1;
            for (Index t = 0; t < width; ++t)
            {
                const Index i = cand[static_cast<std::size_t>(t)];
                if (!used[static_cast<std::size_t>(t)] &&
                    (pick < 0 || by_residual(i, cand[static_cast<std::size_t>(pick)])))
                {
                    pick = t;
                }
            }
            if (pick < 0)
            {
                break;
            }
            used[static_cast<std::size_t>(pick)] = true;
            const Index pivot = cand[static_cast<std::size_t>(pick)];
            const Scalar best = diag(pivot);
            if (best <= threshold)
            {
                break;
            }
            col = panel.col(pick);
            if (k > k0)
            {
                col.noalias() -= factor.middleCols(k0, k - k0) * factor.row(pivot).segment(k0, k - k0).transpose();
            }
            col /= std::sqrt(best);
            for (Index i = 0; i < n; ++i)
            {
                if (is_pivoted(i))
                {
                    col(i) = Scalar(0);
                }
            }
            pivoted[static_cast<std::size_t>(pivot)] = true;
            col(pivot) = std::sqrt(best);
            if (k == factor.cols())
            {
                factor.conservativeResize(Eigen::NoChange, std::min<Index>(max_rank, 2 * k));
            }
            factor.col(k) = col;
            diag -= col.cwiseAbs2();
            for (Index i = 0; i < n; ++i)
            {
                if (is_pivoted(i))
                {
                    diag(i) = Scalar(0);
                }
            }
            if (diag.minCoeff() < -threshold)
            {
                throw ValidationError("pivoted_cholesky: residual diagonal went negative, matrix is not PSD");
            }
            ++k;
        }
    }
    return factor.leftCols(k);
}

/// Rank-revealing factorization of an explicit PSD Gram matrix.
///
/// Trailing pivots below tol * max(diag) are dropped, so rank() is the
/// numerical rank. Throws ValidationError for asymmetric or indefinite input.
template <typename Derived>
GramFactor<typename Derived::Scalar> cholesky_factor(const Eigen::MatrixBase<Derived>& gram,
                                                     typename Derived::Scalar tol = kDefaultCholeskyTol)
{
    using Scalar = typename Derived::Scalar;
    if (gram.rows() != gram.cols())
    {
        throw ValidationError("cholesky_factor: gram must be square, got " + detail::shape(gram.rows(), gram.cols()));
    }
    if (!(tol > Scalar(0)))
    {
        throw ValidationError("cholesky_factor: tol must be positive");
    }
    if (!gram.allFinite())
    {
        throw ValidationError("cholesky_factor: non-finite entries");
    }
    const Matrix<Scalar> k = gram;
    const Scalar magnitude = k.cwiseAbs().maxCoeff();
    const Scalar asym = (k - k.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-10) * std::max(magnitude, Scalar(1)))
    {
        throw ValidationError("cholesky_factor: input is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
    const auto column = [&k](Index j, Vector<Scalar>& out) { out = k.col(j); };
    GramFactor<Scalar> result;
    result.factor = pivoted_cholesky<Scalar>(k.diagonal(), column, tol, k.rows());
    result.source = FactorSource::ExactCholesky;
    if (k.rows() > 0)
    {
        // A PSD residual has |R_ij| <= sqrt(R_ii R_jj), so a large entry here
        // means a negative eigenvalue was hiding off the diagonal.
        const Scalar err = (result.factor * result.factor.transpose() - k).cwiseAbs().maxCoeff();
        const Scalar allowed = std::max(Scalar(kCholeskyReconstructionTol), tol * k.diagonal().maxCoeff());
        if (err > allowed)
        {
            throw ValidationError("cholesky_factor: reconstruction error " + std::to_string(err) +
                                  " exceeds tolerance, matrix is not PSD");
        }
    }
    return result;
}

/// Pivoted Cholesky of the Gram matrix of `points`, evaluating only the
/// kernel columns it needs.
template <typename Derived>
GramFactor<typename Derived::Scalar> kernel_factor(const Eigen::MatrixBase<Derived>& points, const KernelSpec& spec,
                                                   typename Derived::Scalar tol = kDefaultCholeskyTol,
                                                   Index max_rank = -1)
{
    using Scalar = typename Derived::Scalar;
    detail::check_points(points, spec, "kernel_factor");
    // One point per column keeps each kernel evaluation contiguous.
    const Matrix<Scalar> pts = points.transpose();
    const Index n = pts.cols();
    Vector<Scalar> diag(n);
    for (Index i = 0; i < n; ++i)
    {
        diag(i) = kernel_value(spec, pts.col(i), pts.col(i));
    }
    const auto column = [&pts, &spec](Index j, Vector<Scalar>& out) {
        for (Index i = 0; i < pts.cols(); ++i)
        {
            out(i) = kernel_value(spec, pts.col(i), pts.col(j));
        }
    };
    GramFactor<Scalar> result;
    result.factor = pivoted_cholesky<Scalar>(diag, column, tol, max_rank < 0 ? n : max_rank);
    result.source = FactorSource::ExactCholesky;
    return result;
}

} // namespace ktrade
