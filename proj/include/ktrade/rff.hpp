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

#pragma once

#include <cstdint>

#include "ktrade/common.hpp"
#include "ktrade/kernels.hpp"

namespace ktrade
{

/// Random Fourier features for the RBF Gaussian kernel,
/// r(x) = sqrt(2/d) cos(W x + b), W_ij ~ N(0, 1/bandwidth^2), b_i ~ U[0, 2pi).
struct RffProjection
{
    MatrixXd weights; // d x p
    VectorXd phases;  // d
    double bandwidth = 1.0;
    std::uint64_t seed = 0;

    Index feature_dim() const { return weights.rows(); }
    Index input_dim() const { return weights.cols(); }
    double scale() const { return std::sqrt(2.0 / static_cast<double>(feature_dim())); }
};

RffProjection sample_projection(double bandwidth, Index feature_dim, Index input_dim, std::uint64_t seed);

/// Row i holds r(x_i); the result is an n x d factor with L L^T ~ K_rbf.
GramFactord feature_matrix(const MatrixXd& points, const RffProjection& proj);

} // namespace ktrade
