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
/// \file solver.hpp
///
/// Closed-form kernel encoder for the scalarized utility/invariance problem
///
///     max  (1 - lambda) Dep(Z, Y) - lambda Dep(Z, S)
///     s.t. Cov(Z) + gamma <f_i, f_j>_H = I_r.
///
/// With K_X ~ L_X L_X^T the optimum is given by the leading eigenvectors of
/// the symmetric-definite pencil B u = tau C u, where
///
///     B = (1/n^2) L_X^T ((1 - lambda) H K_Y H - lambda H K_S H) L_X
///     C = (1/n) L_X^T H L_X + gamma I.
///
/// B carries the 1/n^2 of the empirical dependence estimator, so the sum of
/// the r leading eigenvalues is the attained objective itself.
///
#pragma once

#include <cstdint>
#include <optional>

#include "ktrade/common.hpp"
#include "ktrade/data.hpp"
#include "ktrade/kernels.hpp"
#include "ktrade/rff.hpp"

namespace ktrade
{

/// Upper end of the admissible trade-off range [0, 1 - 1e-6].
inline constexpr double kMaxLambda = 1.0 - 1e-6;

struct EigenPencil
{
    MatrixXd b;
    MatrixXd c;
    double lambda = 0.0;
    double gamma = 1.0;
    Index n = 0;
};

/// Eigenvalues descending; eigenvector columns are C-orthonormal.
struct EigenSolution
{
    VectorXd eigenvalues;
    MatrixXd eigenvectors;
};

/// Lambda-independent pieces of the pencil, built once per training set:
/// the d x q products L_X^T H L_Y and L_X^T H L_S and (1/n) (H L_X)^T (H L_X).
/// No n x n matrix is ever formed.
struct PencilBlocks
{
    MatrixXd cross_y;
    MatrixXd cross_s;
    MatrixXd covariance;
    Index n = 0;
};

PencilBlocks prepare_pencil(const GramFactord& factor_x, const GramFactord& factor_y, const GramFactord& factor_s);
EigenPencil assemble_pencil(const PencilBlocks& blocks, double lambda, double gamma);
EigenPencil build_pencil(const GramFactord& factor_x, const GramFactord& factor_y, const GramFactord& factor_s,
                         double lambda, double gamma);

/// Cholesky reduction C = R^T R, then a symmetric eigensolve of R^-T B R^-1.
EigenSolution solve_pencil(const EigenPencil& pencil);

/// Number of eigenvalues >= -1e-9 max(unit, |tau_1|).
///
/// `unit` is the scale of the spectrum. B above carries 1/n^2, so pencils
/// built here use unit = 1/n^2 (see pencil_unit); the count then matches
/// the unscaled pencil with unit 1.
Index optimal_dim(const VectorXd& eigenvalues, double unit = 1.0);

inline double pencil_unit(Index n) { return 1.0 / (static_cast<double>(n) * static_cast<double>(n)); }

// --- encoder --------------------------------------------------------------

/// Kernel choice for one attribute. Unset family means rbf for continuous
/// data and one-hot-delta for categorical data; unset bandwidth means the
/// median heuristic on the training split.
struct AttributeKernel
{
    std::optional<KernelFamily> family;
    std::optional<double> bandwidth;
    /// 0 keeps the exact kernel; only honored for X.
    Index rff_dim = 0;
    std::uint64_t rff_seed = 0;
};

struct KernelConfig
{
    AttributeKernel x;
    AttributeKernel y;
    AttributeKernel s;
};

enum class EncoderPath
{
    Exact,
    Rff,
};

/// Everything needed to evaluate k_X(x_i, .) at prediction time.
struct KernelContext
{
    EncoderPath path = EncoderPath::Exact;
    KernelSpec spec;
    MatrixXd train_points; // exact path
    RffProjection rff;     // rff path

    Index input_dim() const { return spec.input_dim; }
};

struct EncoderModel
{
    /// r x n (exact) or r x d (rff).
    MatrixXd theta;
    KernelContext kernel;
    KernelSpec y_kernel;
    KernelSpec s_kernel;
    double lambda = 0.0;
    double gamma = 1.0;
    Index r = 0;
    VectorXd eigenvalues;
    double objective = 0.0;
};

/// Points fed to a kernel for an attribute: codes for one-hot-delta, one-hot
/// rows for other kernels on categorical data, raw values otherwise.
MatrixXd kernel_points(const Attribute& attr, KernelFamily family);

/// Resolves family and bandwidth for an attribute on the given sample.
KernelSpec resolve_kernel(const AttributeKernel& cfg, const Attribute& attr);
KernelSpec resolve_x_kernel(const AttributeKernel& cfg, const MatrixXd& x);

/// Factors of the three Gram matrices on a training set.
struct TrainingFactors
{
    KernelContext x_context;
    GramFactord x;
    GramFactord y;
    GramFactord s;
    KernelSpec y_spec;
    KernelSpec s_spec;
};

TrainingFactors build_training_factors(const Dataset& train, const KernelConfig& cfg);

/// Minimum-norm encoder from a solved pencil: Theta = U_r^T L_X^+ on the
/// exact path, theta_w = U_r^T on the rff path.
EncoderModel make_encoder(const TrainingFactors& factors, const EigenSolution& solution, double lambda, double gamma,
                          Index r);

/// Fits on `train`; r defaults to optimal_dim of the spectrum.
EncoderModel fit_encoder(const Dataset& train, const KernelConfig& cfg, double lambda, double gamma,
                         std::optional<Index> r = std::nullopt);

/// Z = f(points), one row per point.
MatrixXd encode(const EncoderModel& model, const MatrixXd& points);

} // namespace ktrade
