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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ktrade/rff.hpp"
#include "test_util.hpp"

using namespace ktrade;
using ktrade::testing::max_abs_diff;
using ktrade::testing::normal_matrix;

TEST_CASE("projection is deterministic per seed")
{
    const RffProjection a = sample_projection(1.5, 50, 3, 42);
    const RffProjection b = sample_projection(1.5, 50, 3, 42);
    const RffProjection c = sample_projection(1.5, 50, 3, 43);
    CHECK(a.weights == b.weights);
    CHECK(a.phases == b.phases);
    CHECK(a.weights != c.weights);
}

TEST_CASE("weights have variance 1 / bandwidth^2")
{
    const RffProjection p = sample_projection(1.0, 10000, 1, 1);
    const double mean = p.weights.mean();
    const double var = (p.weights.array() - mean).square().mean();
    CHECK(std::abs(var - 1.0) <= 0.05);
    const RffProjection q = sample_projection(2.0, 10000, 1, 1);
    CHECK(std::abs((q.weights.array() - q.weights.mean()).square().mean() - 0.25) <= 0.05 * 0.25);
    CHECK(p.phases.minCoeff() >= 0.0);
    CHECK(p.phases.maxCoeff() < 2.0 * M_PI);
}

TEST_CASE("features approximate the rbf kernel")
{
    const RffProjection p = sample_projection(1.0, 2000, 2, 2);
    const MatrixXd x = normal_matrix(2, 2, 3) * 0.5;
    const MatrixXd f = feature_matrix(x, p).factor;
    const double exact = gram_matrix(x, KernelSpec::rbf(1.0, 2))(0, 1);
    CHECK(std::abs(f.row(0).dot(f.row(1)) - exact) <= 0.05);
    CHECK(f.row(0).squaredNorm() <= 2.0);
}

TEST_CASE("feature matrix is a pointwise map")
{
    const RffProjection p = sample_projection(0.8, 64, 3, 4);
    MatrixXd x = normal_matrix(3, 3, 5);
    x.row(2) = x.row(0);
    const GramFactord f = feature_matrix(x, p);
    CHECK(f.source == FactorSource::RffDirect);
    CHECK(f.rank() == 64);
    CHECK(f.factor.row(2) == f.factor.row(0));
    const GramFactord one = feature_matrix(x.topRows(1), p);
    CHECK(one.factor.row(0) == f.factor.row(0));
    const Eigen::VectorXd direct =
        p.scale() * ((p.weights * x.row(1).transpose()) + p.phases).array().cos().matrix();
    CHECK(max_abs_diff(f.factor.row(1).transpose(), direct) < 1e-15);
    CHECK_THROWS_AS(feature_matrix(normal_matrix(2, 2, 6), p), ValidationError);
}

TEST_CASE("gram approximation error")
{
    const MatrixXd x = normal_matrix(100, 2, 7);
    const MatrixXd k = gram_matrix(x, KernelSpec::rbf(1.0, 2));
    const MatrixXd f = feature_matrix(x, sample_projection(1.0, 1000, 2, 8)).factor;
    CHECK(max_abs_diff(f * f.transpose(), k) <= 0.1);
}

TEST_CASE("mean squared error decays like 1/d")
{
    const MatrixXd x = normal_matrix(60, 2, 9);
    const MatrixXd k = gram_matrix(x, KernelSpec::rbf(1.0, 2));
    double prev = 0.0;
    for (const Index d : {100, 400, 1600})
    {
        double mse = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed)
        {
            const MatrixXd f = feature_matrix(x, sample_projection(1.0, d, 2, 100 + seed)).factor;
            mse += (f * f.transpose() - k).squaredNorm() / static_cast<double>(k.size());
        }
        if (prev > 0.0)
        {
            const double ratio = prev / mse;
            CHECK(ratio >= 2.0);
            CHECK(ratio <= 8.0);
        }
        prev = mse;
    }
}

TEST_CASE("sample projection validates")
{
    CHECK_THROWS_AS(sample_projection(0.0, 10, 2, 0), ValidationError);
    CHECK_THROWS_AS(sample_projection(1.0, 0, 2, 0), ValidationError);
    CHECK_THROWS_AS(sample_projection(1.0, 10, 0, 0), ValidationError);
}
