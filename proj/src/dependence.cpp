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

#include "ktrade/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "ktrade/random.hpp"

namespace ktrade
{

namespace
{

double inv_n2(Index n) { return 1.0 / (static_cast<double>(n) * static_cast<double>(n)); }

// Eigenpairs of G^T G for a centered factor G, keeping the non-negligible
// part of the spectrum. Columns of V scaled by 1/sqrt(w) are the left
// singular vectors of G once multiplied by G.
struct FactorSpectrum
{
    VectorXd w;
    MatrixXd v;
};

FactorSpectrum factor_spectrum(const MatrixXd& centered)
{
    FactorSpectrum out;
    if (centered.cols() == 0)
    {
        return out;
    }
    const MatrixXd gram = centered.transpose() * centered;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
    {
        throw NumericalError("kcc_emp: eigensolver did not converge");
    }
    const VectorXd& w = eig.eigenvalues();
    const double top = w.size() > 0 ? w.maxCoeff() : 0.0;
    if (!(top > 0.0))
    {
        return out;
    }
    Index keep = 0;
    for (Index i = 0; i < w.size(); ++i)
    {
        keep += w(i) > 1e-12 * top ? 1 : 0;
    }
    out.w = w.tail(keep);
    out.v = eig.eigenvectors().rightCols(keep);
    return out;
}

} // namespace

double dep_emp(const MatrixXd& theta, const MatrixXd& gram_x, const GramFactord& factor_s)
{
    const Index n = gram_x.rows();
    if (gram_x.cols() != n || theta.cols() != n || factor_s.rows() != n)
    {
        throw ValidationError("dep_emp: theta is " + detail::shape(theta.rows(), theta.cols()) + ", gram_x is " +
                              detail::shape(gram_x.rows(), gram_x.cols()) + ", factor_s has " +
                              std::to_string(factor_s.rows()) + " rows");
    }
    if (n == 0 || theta.rows() == 0)
    {
        return 0.0;
    }
    const MatrixXd projected = theta * gram_x;
    return (projected * center_factor(factor_s.factor)).squaredNorm() * inv_n2(n);
}

double dep_emp_embedded(const MatrixXd& z, const GramFactord& factor_s)
{
    const Index n = z.rows();
    if (factor_s.rows() != n)
    {
        throw ValidationError("dep_emp: embedding has " + std::to_string(n) + " rows, factor has " +
                              std::to_string(factor_s.rows()));
    }
    if (n == 0 || z.cols() == 0)
    {
        return 0.0;
    }
    return (z.transpose() * center_factor(factor_s.factor)).squaredNorm() * inv_n2(n);
}

double dep_emp_rff(const MatrixXd& theta_w, const GramFactord& factor_x, const GramFactord& factor_s)
{
    const Index n = factor_x.rows();
    if (factor_s.rows() != n || theta_w.cols() != factor_x.rank())
    {
        throw ValidationError("dep_emp_rff: theta_w is " + detail::shape(theta_w.rows(), theta_w.cols()) +
                              ", factor_x is " + detail::shape(n, factor_x.rank()) + ", factor_s has " +
                              std::to_string(factor_s.rows()) + " rows");
    }
    if (n == 0 || theta_w.rows() == 0)
    {
        return 0.0;
    }
    const MatrixXd cross = factor_x.factor.transpose() * center_factor(factor_s.factor);
    return (theta_w * cross).squaredNorm() * inv_n2(n);
}

double hsic_emp(const MatrixXd& gram_a, const MatrixXd& gram_b)
{
    const Index n = gram_a.rows();
    if (gram_a.cols() != n || gram_b.rows() != n || gram_b.cols() != n)
    {
        throw ValidationError("hsic_emp: shapes " + detail::shape(gram_a.rows(), gram_a.cols()) + " and " +
                              detail::shape(gram_b.rows(), gram_b.cols()) + " differ or are not square");
    }
    if (n == 0)
    {
        return 0.0;
    }
    // Tr[A H B H] = <H A H, B> for symmetric B.
    const MatrixXd centered = center_factor(center_factor(gram_a).transpose());
    return centered.cwiseProduct(gram_b.transpose()).sum() * inv_n2(n);
}

KccSide kcc_side(const MatrixXd& points, const KernelSpec& spec, const KccOptions& options)
{
    if (!(options.reg > 0.0))
    {
        throw ValidationError("kcc_emp: reg must be positive");
    }
    KccSide side;
    side.n = points.rows();
    side.reg = options.reg;
    side.basis = MatrixXd::Zero(side.n, 0);
    if (points.cols() == 0 || side.n == 0)
    {
        return side;
    }
    const MatrixXd g = center_factor(kernel_factor(points, spec, options.pivot_tol, options.max_rank).factor);
    const FactorSpectrum fs = factor_spectrum(g);
    if (fs.w.size() == 0)
    {
        return side;
    }
    const double c = static_cast<double>(side.n) * options.reg;
    const VectorXd weights = (fs.w.array().sqrt() / (fs.w.array() + c)).matrix();
    side.basis = g * (fs.v * weights.asDiagonal());
    return side;
}

double kcc_emp(const KccSide& a, const KccSide& b)
{
    if (a.n != b.n)
    {
        throw ValidationError("kcc_emp: sides have " + std::to_string(a.n) + " and " + std::to_string(b.n) +
                              " samples");
    }
    if (a.reg != b.reg)
    {
        throw ValidationError("kcc_emp: sides were built with different regularization");
    }
    if (a.n < 3)
    {
        throw ValidationError("kcc_emp: need at least 3 samples");
    }
    if (a.basis.cols() == 0 || b.basis.cols() == 0)
    {
        return 0.0;
    }
    const MatrixXd m = a.basis.transpose() * b.basis;
    // Top singular value via the smaller Gram matrix.
    const MatrixXd small = m.rows() <= m.cols() ? MatrixXd(m * m.transpose()) : MatrixXd(m.transpose() * m);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(small, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
    {
        throw NumericalError("kcc_emp: eigensolver did not converge");
    }
    const double rho = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
    return std::clamp(rho, 0.0, 1.0);
}

double kcc_emp(const MatrixXd& z, const MatrixXd& s, const KernelSpec& spec_z, const KernelSpec& spec_s,
               const KccOptions& options)
{
    if (s.rows() != z.rows())
    {
        throw ValidationError("kcc_emp: z has " + std::to_string(z.rows()) + " rows, s has " +
                              std::to_string(s.rows()));
    }
    if (z.rows() < 3)
    {
        throw ValidationError("kcc_emp: need at least 3 samples");
    }
    return kcc_emp(kcc_side(z, spec_z, options), kcc_side(s, spec_s, options));
}

double kcc_emp(const MatrixXd& z, const MatrixXd& s, const KernelSpec& spec_z, const KernelSpec& spec_s, double reg)
{
    KccOptions options;
    options.reg = reg;
    return kcc_emp(z, s, spec_z, spec_s, options);
}

double kcc_bandwidth(const MatrixXd& points)
{
    return median_bandwidth(points.topRows(std::min(points.rows(), kKccBandwidthRows)));
}

double kcc_median(const MatrixXd& z, const MatrixXd& s, const KccOptions& options)
{
    if (z.cols() == 0)
    {
        return 0.0;
    }
    if (z.rows() < 3)
    {
        throw ValidationError("kcc_emp: need at least 3 samples");
    }
    const KernelSpec spec_z = KernelSpec::rbf(kcc_bandwidth(z), z.cols());
    const KernelSpec spec_s = KernelSpec::rbf(kcc_bandwidth(s), s.cols());
    return kcc_emp(z, s, spec_z, spec_s, options);
}

double dpv(const Eigen::VectorXi& predictions, const Eigen::VectorXi& groups, Index num_groups)
{
    const Index n = predictions.size();
    if (groups.size() != n)
    {
        throw ValidationError("dpv: " + std::to_string(n) + " predictions but " + std::to_string(groups.size()) +
                              " group labels");
    }
    if (n == 0)
    {
        throw ValidationError("dpv: empty input");
    }
    // counts[group][class]
    std::map<int, std::map<int, double>> counts;
    std::map<int, double> group_size;
    std::map<int, double> class_size;
    for (Index i = 0; i < n; ++i)
    {
        counts[groups(i)][predictions(i)] += 1.0;
        group_size[groups(i)] += 1.0;
        class_size[predictions(i)] += 1.0;
    }
    if (num_groups >= 0)
    {
        for (Index g = 0; g < num_groups; ++g)
        {
            if (group_size.find(static_cast<int>(g)) == group_size.end())
            {
                throw ValidationError("dpv: group " + std::to_string(g) + " has no samples");
            }
        }
        if (static_cast<Index>(group_size.size()) != num_groups)
        {
            throw ValidationError("dpv: group codes outside [0, " + std::to_string(num_groups) + ")");
        }
    }
    const double g = static_cast<double>(group_size.size());
    double total = 0.0;
    for (const auto& [cls, size] : class_size)
    {
        double mean = 0.0;
        double sq = 0.0;
        for (const auto& [grp, gsize] : group_size)
        {
            const auto& row = counts[grp];
            const auto it = row.find(cls);
            const double p = it == row.end() ? 0.0 : it->second / gsize;
            mean += p;
            sq += p * p;
        }
        mean /= g;
        const double var = std::max(0.0, sq / g - mean * mean);
        total += (size / static_cast<double>(n)) * var;
    }
    return total;
}

MonteCarloEstimate dep_population_mc(const EncoderModel& encoder, const JointSampler& sampler,
                                     const KernelSpec& s_spec, Index n_mc, std::uint64_t seed)
{
    if (n_mc < 2)
    {
        throw ValidationError("dep_population_mc: need at least 2 samples");
    }
    MonteCarloEstimate out;
    if (encoder.r == 0)
    {
        return out;
    }
    Rng rng(seed);
    const auto [x, s] = sampler(rng, n_mc);
    const MatrixXd f = encode(encoder, x);
    const Index shifts = std::min<Index>(16, n_mc - 1);
    const Index batches = std::min<Index>(20, n_mc);
    const Index r = f.cols();

    // Per-batch sums over pairs (i, i + k mod n).
    struct Sums
    {
        VectorXd ffk, fk, f;
        double k = 0.0;
        double pairs = 0.0;
    };
    std::vector<Sums> acc(static_cast<std::size_t>(batches));
    for (auto& a : acc)
    {
        a.ffk = VectorXd::Zero(r);
        a.fk = VectorXd::Zero(r);
        a.f = VectorXd::Zero(r);
    }
    for (Index i = 0; i < n_mc; ++i)
    {
        Sums& a = acc[static_cast<std::size_t>(i * batches / n_mc)];
        a.f += f.row(i).transpose();
        for (Index k = 1; k <= shifts; ++k)
        {
            const Index j = (i + k) % n_mc;
            const double kij = kernel_value(s_spec, s.row(i), s.row(j));
            a.ffk += kij * f.row(i).cwiseProduct(f.row(j)).transpose();
            a.fk += (0.5 * kij) * (f.row(i) + f.row(j)).transpose();
            a.k += kij;
            a.pairs += 1.0;
        }
    }
    const auto estimate = [r](const Sums& a, double samples) {
        const VectorXd mf = a.f / samples;
        const double mk = a.k / a.pairs;
        double total = 0.0;
        for (Index c = 0; c < r; ++c)
        {
            total += a.ffk(c) / a.pairs + mf(c) * mf(c) * mk - 2.0 * mf(c) * a.fk(c) / a.pairs;
        }
        return total;
    };
    Sums all = acc.front();
    for (std::size_t b = 1; b < acc.size(); ++b)
    {
        all.ffk += acc[b].ffk;
        all.fk += acc[b].fk;
        all.f += acc[b].f;
        all.k += acc[b].k;
        all.pairs += acc[b].pairs;
    }
    out.raw = estimate(all, static_cast<double>(n_mc));
    out.value = std::max(0.0, out.raw);
    if (batches > 1)
    {
        VectorXd per(batches);
        for (Index b = 0; b < batches; ++b)
        {
            const Sums& a = acc[static_cast<std::size_t>(b)];
            per(b) = estimate(a, a.pairs / static_cast<double>(shifts));
        }
        const double mean = per.mean();
        const double var = (per.array() - mean).square().sum() / static_cast<double>(batches - 1);
        out.std_error = std::sqrt(var / static_cast<double>(batches));
    }
    return out;
}

} // namespace ktrade
