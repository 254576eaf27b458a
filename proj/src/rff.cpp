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

#include "ktrade/rff.hpp"

#include <numbers>

#include "ktrade/random.hpp"

namespace ktrade
{

RffProjection sample_projection(double bandwidth, Index feature_dim, Index input_dim, std::uint64_t seed)
{
    if (!(bandwidth > 0.0 && std::isfinite(bandwidth)))
    {
        throw ValidationError("sample_projection: bandwidth must be positive and finite");
    }
    if (feature_dim < 1 || input_dim < 1)
    {
        throw ValidationError("sample_projection: feature and input dimensions must be positive");
    }
    Rng rng(seed);
    RffProjection proj;
    proj.bandwidth = bandwidth;
    proj.seed = seed;
    proj.weights.resize(feature_dim, input_dim);
    for (Index i = 0; i < feature_dim; ++i)
    {
        for (Index j = 0; j < input_dim; ++j)
        {
            proj.weights(i, j) = rng.normal() / bandwidth;
        }
    }
    proj.phases.resize(feature_dim);
    for (Index i = 0; i < feature_dim; ++i)
    {
        proj.phases(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return proj;
}

GramFactord feature_matrix(const MatrixXd& points, const RffProjection& proj)
{
    if (points.cols() != proj.input_dim())
    {
        throw ValidationError("feature_matrix: points have dimension " + std::to_string(points.cols()) +
                              " but the projection expects " + std::to_string(proj.input_dim()));
    }
    if (!points.allFinite())
    {
        throw ValidationError("feature_matrix: non-finite input entries");
    }
    // One rank-1 update per input coordinate rather than a GEMM: every entry
    // then sees the same operation order, so equal rows map to equal rows.
    MatrixXd arg = proj.phases.transpose().replicate(points.rows(), 1);
    for (Index k = 0; k < points.cols(); ++k)
    {
        arg.noalias() += points.col(k) * proj.weights.col(k).transpose();
    }
    GramFactord out;
    out.factor = proj.scale() * arg.array().cos().matrix();
    out.source = FactorSource::RffDirect;
    return out;
}

} // namespace ktrade
