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

#include "ktrade/solver.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace ktrade
{

namespace
{

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void check_trade_off(double lambda, double gamma)
{
    if (!(lambda >= 0.0 && lambda < 1.0))
    {
        throw ValidationError("lambda must lie in [0, 1), got " + std::to_string(lambda));
    }
    if (!(gamma > 0.0 && std::isfinite(gamma)))
    {
        throw ValidationError("gamma must be positive, got " + std::to_string(gamma));
    }
}

} // namespace

PencilBlocks prepare_pencil(const GramFactord& factor_x, const GramFactord& factor_y, const GramFactord& factor_s)
{
    const Index n = factor_x.rows();
    if (factor_y.rows() != n || factor_s.rows() != n)
    {
        throw ValidationError("build_pencil: factors have different row counts (x " + std::to_string(n) + ", y " +
                              std::to_string(factor_y.rows()) + ", s " + std::to_string(factor_s.rows()) + ")");
    }
    if (n == 0)
    {
        throw ValidationError("build_pencil: empty training set");
    }
    PencilBlocks blocks;
    blocks.n = n;
    const MatrixXd centered_x = center_factor(factor_x.factor);
    blocks.cross_y.noalias() = factor_x.factor.transpose() * center_factor(factor_y.factor);
    blocks.cross_s.noalias() = factor_x.factor.transpose() * center_factor(factor_s.factor);
    blocks.covariance.noalias() = centered_x.transpose() * centered_x;
    blocks.covariance /= static_cast<double>(n);
    return blocks;
}

EigenPencil assemble_pencil(const PencilBlocks& blocks, double lambda, double gamma)
{
    check_trade_off(lambda, gamma);
    const double n2 = static_cast<double>(blocks.n) * static_cast<double>(blocks.n);
    const Index d = blocks.covariance.rows();
    EigenPencil pencil;
    pencil.lambda = lambda;
    pencil.gamma = gamma;
    pencil.n = blocks.n;
    MatrixXd b(d, d);
    b.noalias() = ((1.0 - lambda) / n2) * (blocks.cross_y * blocks.cross_y.transpose());
    b.noalias() -= (lambda / n2) * (blocks.cross_s * blocks.cross_s.transpose());
    pencil.b = symmetrized(b);
    pencil.c = symmetrized(blocks.covariance);
    pencil.c.diagonal().array() += gamma;
    return pencil;
}

EigenPencil build_pencil(const GramFactord& factor_x, const GramFactord& factor_y, const GramFactord& factor_s,
                         double lambda, double gamma)
{
    check_trade_off(lambda, gamma);
    return assemble_pencil(prepare_pencil(factor_x, factor_y, factor_s), lambda, gamma);
}

EigenSolution solve_pencil(const EigenPencil& pencil)
{
    const Index d = pencil.b.rows();
    if (pencil.b.cols() != d || pencil.c.rows() != d || pencil.c.cols() != d)
    {
        throw ValidationError("solve_pencil: B is " + detail::shape(pencil.b.rows(), pencil.b.cols()) + ", C is " +
                              detail::shape(pencil.c.rows(), pencil.c.cols()));
    }
    EigenSolution sol;
    if (d == 0)
    {
        return sol;
    }
    if (!pencil.b.allFinite() || !pencil.c.allFinite())
    {
        throw NumericalError("solve_pencil: non-finite pencil entries");
    }
    const Eigen::LLT<MatrixXd> llt(pencil.c);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
    {
        throw NumericalError("solve_pencil: C is numerically singular; increase gamma");
    }
    const auto lower = llt.matrixL();
    // A = L^-1 B L^-T with C = L L^T.
    const MatrixXd half = lower.solve(pencil.b);
    const MatrixXd reduced = symmetrized(lower.solve(half.transpose()));
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(reduced);
    if (eig.info() != Eigen::Success)
    {
        throw NumericalError("solve_pencil: symmetric eigensolver did not converge");
    }
    sol.eigenvalues = eig.eigenvalues().reverse();
    const MatrixXd v = eig.eigenvectors().rowwise().reverse();
    sol.eigenvectors = llt.matrixU().solve(v);
    return sol;
}

Index optimal_dim(const VectorXd& eigenvalues, double unit)
{
    if (eigenvalues.size() == 0)
    {
        return 0;
    }
    const double tol = 1e-9 * std::max(unit, std::abs(eigenvalues(0)));
    Index count = 0;
    while (count < eigenvalues.size() && eigenvalues(count) >= -tol)
    {
        ++count;
    }
    return count;
}

MatrixXd kernel_points(const Attribute& attr, KernelFamily family)
{
    if (family == KernelFamily::OneHotDelta)
    {
        if (!attr.categorical)
        {
            throw ValidationError("one-hot-delta kernel requires a categorical attribute");
        }
        return attr.values;
    }
    return attr.as_vectors();
}

KernelSpec resolve_kernel(const AttributeKernel& cfg, const Attribute& attr)
{
    KernelSpec spec;
    spec.family = cfg.family.value_or(attr.categorical ? KernelFamily::OneHotDelta : KernelFamily::RbfGaussian);
    const MatrixXd points = kernel_points(attr, spec.family);
    spec.input_dim = points.cols();
    if (spec.family == KernelFamily::RbfGaussian)
    {
        spec.bandwidth = cfg.bandwidth ? *cfg.bandwidth : median_bandwidth(points);
    }
    spec.validate();
    return spec;
}

KernelSpec resolve_x_kernel(const AttributeKernel& cfg, const MatrixXd& x)
{
    KernelSpec spec;
    spec.family = cfg.family.value_or(KernelFamily::RbfGaussian);
    spec.input_dim = x.cols();
    if (spec.family == KernelFamily::RbfGaussian)
    {
        spec.bandwidth = cfg.bandwidth ? *cfg.bandwidth : median_bandwidth(x);
    }
    spec.validate();
    return spec;
}

TrainingFactors build_training_factors(const Dataset& train, const KernelConfig& cfg)
{
    if (train.size() == 0)
    {
        throw ValidationError("fit_encoder: empty dataset");
    }
    TrainingFactors f;
    f.x_context.spec = resolve_x_kernel(cfg.x, train.x);
    if (cfg.x.rff_dim > 0)
    {
        if (f.x_context.spec.family != KernelFamily::RbfGaussian)
        {
            throw ValidationError("random Fourier features require the rbf kernel on x");
        }
        f.x_context.path = EncoderPath::Rff;
        f.x_context.rff =
            sample_projection(f.x_context.spec.bandwidth, cfg.x.rff_dim, train.x.cols(), cfg.x.rff_seed);
        f.x = feature_matrix(train.x, f.x_context.rff);
    }
    else
    {
        f.x_context.path = EncoderPath::Exact;
        f.x_context.train_points = train.x;
        f.x = kernel_factor(train.x, f.x_context.spec);
    }
    f.y_spec = resolve_kernel(cfg.y, train.y);
    f.y = kernel_factor(kernel_points(train.y, f.y_spec.family), f.y_spec);
    f.s_spec = resolve_kernel(cfg.s, train.s);
    f.s = kernel_factor(kernel_points(train.s, f.s_spec.family), f.s_spec);
    return f;
}

EncoderModel make_encoder(const TrainingFactors& factors, const EigenSolution& solution, double lambda, double gamma,
                          Index r)
{
    const Index d = factors.x.rank();
    if (r < 0 || r > d)
    {
        throw ValidationError("requested dimensionality r = " + std::to_string(r) + " exceeds the factor rank d = " +
                              std::to_string(d));
    }
    if (solution.eigenvectors.rows() != d)
    {
        throw ValidationError("make_encoder: eigenvectors do not match the x factor rank");
    }
    EncoderModel model;
    model.kernel = factors.x_context;
    model.y_kernel = factors.y_spec;
    model.s_kernel = factors.s_spec;
    model.lambda = lambda;
    model.gamma = gamma;
    model.r = r;
    model.eigenvalues = solution.eigenvalues;
    model.objective = solution.eigenvalues.head(r).sum();
    const MatrixXd leading = solution.eigenvectors.leftCols(r);
    if (factors.x_context.path == EncoderPath::Rff)
    {
        model.theta = leading.transpose();
        return model;
    }
    // Theta^T = (L^+)^T U_r = Q R^-T U_r for the thin QR L = Q R.
    const Index n = factors.x.rows();
    const Eigen::HouseholderQR<MatrixXd> qr(factors.x.factor);
    const auto upper = qr.matrixQR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
    MatrixXd padded = MatrixXd::Zero(n, r);
    padded.topRows(d) = upper.transpose().solve(leading);
    const MatrixXd theta_t = qr.householderQ() * padded;
    model.theta = theta_t.transpose();
    return model;
}

EncoderModel fit_encoder(const Dataset& train, const KernelConfig& cfg, double lambda, double gamma,
                         std::optional<Index> r)
{
    check_trade_off(lambda, gamma);
    const TrainingFactors factors = build_training_factors(train, cfg);
    const EigenSolution sol = solve_pencil(build_pencil(factors.x, factors.y, factors.s, lambda, gamma));
    return make_encoder(factors, sol, lambda, gamma, r ? *r : optimal_dim(sol.eigenvalues, pencil_unit(train.size())));
}

MatrixXd encode(const EncoderModel& model, const MatrixXd& points)
{
    if (points.cols() != model.kernel.input_dim())
    {
        throw ValidationError("encode: data has dimension " + std::to_string(points.cols()) +
                              " but the model expects dimension " + std::to_string(model.kernel.input_dim()));
    }
    if (model.kernel.path == EncoderPath::Rff)
    {
        return feature_matrix(points, model.kernel.rff).factor * model.theta.transpose();
    }
    if (model.r == 0)
    {
        return MatrixXd(points.rows(), 0);
    }
    return cross_gram(points, model.kernel.train_points, model.kernel.spec) * model.theta.transpose();
}

} // namespace ktrade
