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
/// \file dependence.hpp
///
/// Dependence measures between a representation Z and an attribute:
/// the factor-based estimator (1/n^2) ||Theta K_X H L_S||_F^2, biased HSIC,
/// regularized kernel canonical correlation, demographic parity violation
/// and a Monte-Carlo estimate of the population quantity.
///
#pragma once

#include <cstdint>
#include <optional>

#include "ktrade/common.hpp"
#include "ktrade/data.hpp"
#include "ktrade/kernels.hpp"
#include "ktrade/solver.hpp"

namespace ktrade
{

struct DependenceReport
{
    double dep_zs = 0.0;
    double dep_zy = 0.0;
    std::optional<double> hsic_zs;
    std::optional<double> kcc_zs;
    std::optional<double> dpv;
};

/// (1/n^2) ||Theta K_X H L_S||_F^2 for an r x n coefficient matrix.
double dep_emp(const MatrixXd& theta, const MatrixXd& gram_x, const GramFactord& factor_s);

/// Same estimator from the embedding itself: (1/n^2) ||Z^T H L_S||_F^2 with
/// Z = K_X Theta^T one row per sample.
double dep_emp_embedded(const MatrixXd& z, const GramFactord& factor_s);

/// Feature-space form (1/n^2) ||theta_w L_X^T H L_S||_F^2; O(n d) memory.
double dep_emp_rff(const MatrixXd& theta_w, const GramFactord& factor_x, const GramFactord& factor_s);

/// Biased estimator (1/n^2) Tr[K_A H K_B H].
double hsic_emp(const MatrixXd& gram_a, const MatrixXd& gram_b);

struct KccOptions
{
    double reg = 1e-3;
    /// Relative pivot threshold of the low-rank Gram factors. Components
    /// below it carry weight w / (w + n reg) ~ 0 and do not move the result.
    double pivot_tol = 1e-2;
    Index max_rank = 2000;
};

/// One argument of kcc_emp, reusable across calls: the centered low-rank
/// factor G projected onto its right singular vectors and weighted by
/// sqrt(w) / (w + n reg), so that R_Z R_S has the singular values of
/// basis_Z^T basis_S.
struct KccSide
{
    MatrixXd basis;
    Index n = 0;
    double reg = 0.0;
};

KccSide kcc_side(const MatrixXd& points, const KernelSpec& spec, const KccOptions& options = {});
double kcc_emp(const KccSide& a, const KccSide& b);

/// Largest canonical correlation of regularized kernel CCA, i.e. the top
/// singular value of R_Z R_S with R = K~ (K~ + n reg I)^-1 and K~ = H K H.
/// Clamped to [0, 1]; 0 for an empty or constant Z.
double kcc_emp(const MatrixXd& z, const MatrixXd& s, const KernelSpec& spec_z, const KernelSpec& spec_s,
               const KccOptions& options = {});
double kcc_emp(const MatrixXd& z, const MatrixXd& s, const KernelSpec& spec_z, const KernelSpec& spec_s, double reg);

/// Rows used by kcc_bandwidth.
inline constexpr Index kKccBandwidthRows = 1000;

/// Median-heuristic bandwidth over the first kKccBandwidthRows rows; callers
/// pass shuffled samples, so this is a uniform subsample.
double kcc_bandwidth(const MatrixXd& points);

/// kcc_emp with rbf kernels at kcc_bandwidth.
double kcc_median(const MatrixXd& z, const MatrixXd& s, const KccOptions& options = {});

/// E_Yhat[Var_S(P[Yhat | S])] with groups weighted uniformly.
///
/// If num_groups is given, every code in [0, num_groups) must occur;
/// otherwise the groups are the codes present.
double dpv(const Eigen::VectorXi& predictions, const Eigen::VectorXi& groups, Index num_groups = -1);

struct MonteCarloEstimate
{
    /// max(raw, 0); the population quantity is non-negative.
    double value = 0.0;
    double raw = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo estimate of
///
///     sum_j E[f_j f_j' k(S, S')] + E[f_j]^2 E[k(S, S')] - 2 E[f_j] E[f_j(X) k(S, S')]
///
/// with (X', S') an independent copy. Pairs are formed by cyclic shifts of
/// one sample of size n_mc; the standard error comes from batch means.
MonteCarloEstimate dep_population_mc(const EncoderModel& encoder, const JointSampler& sampler,
                                     const KernelSpec& s_spec, Index n_mc, std::uint64_t seed);

} // namespace ktrade
