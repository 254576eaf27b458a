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

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ktrade/kernels.hpp"
#include "test_util.hpp"

using namespace ktrade;
using ktrade::testing::max_abs_diff;
using ktrade::testing::normal_matrix;

TEST_CASE("gram of two identical points is all ones")
{
    MatrixXd x(2, 3);
    x << 0.3, -1.0, 2.0, 0.3, -1.0, 2.0;
    const MatrixXd k = gram_matrix(x, KernelSpec::rbf(0.7, 3));
    CHECK(max_abs_diff(k, MatrixXd::Ones(2, 2)) == 0.0);
}

TEST_CASE("rbf off-diagonal follows the formula")
{
    MatrixXd x(2, 1);
    x << 0.0, 1.0;
    const MatrixXd k = gram_matrix(x, KernelSpec::rbf(1.0, 1));
    CHECK(k(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(k(0, 0) == 1.0);
}

TEST_CASE("linear gram equals pairwise dot products")
{
    const MatrixXd x = normal_matrix(5, 4, 1);
    const MatrixXd k = gram_matrix(x, KernelSpec::linear(4));
    for (Index i = 0; i < 5; ++i)
    {
        for (Index j = 0; j < 5; ++j)
        {
            double dot = 0.0;
            for (Index c = 0; c < 4; ++c)
            {
                dot += x(i, c) * x(j, c);
            }
            CHECK(k(i, j) == doctest::Approx(dot).epsilon(1e-14));
        }
    }
}

TEST_CASE("one-hot-delta compares codes")
{
    MatrixXd s(4, 1);
    s << 0, 2, 0, 1;
    const MatrixXd k = gram_matrix(s, KernelSpec::one_hot_delta());
    MatrixXd want(4, 4);
    want << 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 1;
    CHECK(max_abs_diff(k, want) == 0.0);
}

TEST_CASE("gram rejects bad input")
{
    MatrixXd x = normal_matrix(3, 2, 2);
    CHECK_THROWS_AS(gram_matrix(x, KernelSpec::rbf(1.0, 3)), ValidationError);
    CHECK_THROWS_AS(gram_matrix(x, KernelSpec::rbf(0.0, 2)), ValidationError);
    x(1, 1) = std::nan("");
    CHECK_THROWS_AS(gram_matrix(x, KernelSpec::rbf(1.0, 2)), ValidationError);
    CHECK_THROWS_AS(kernel_family_from_string("poly"), ValidationError);
}

TEST_CASE("gram matrices are symmetric PSD")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const MatrixXd x = normal_matrix(40, 3, 10 + seed);
        for (const KernelSpec& spec : {KernelSpec::rbf(0.8, 3), KernelSpec::linear(3)})
        {
            const MatrixXd k = gram_matrix(x, spec);
            CHECK(max_abs_diff(k, k.transpose()) == 0.0);
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(k);
            CHECK(es.eigenvalues().minCoeff() >= -1e-8);
        }
    }
}

TEST_CASE("cross gram matches gram on the same points")
{
    const MatrixXd x = normal_matrix(7, 2, 3);
    const KernelSpec spec = KernelSpec::rbf(1.3, 2);
    CHECK(max_abs_diff(cross_gram(x, x, spec), gram_matrix(x, spec)) < 1e-15);
}

TEST_CASE("median bandwidth")
{
    MatrixXd two(2, 1);
    two << 0.0, 2.0;
    CHECK(median_bandwidth(two) == 2.0);
    CHECK(median_bandwidth(MatrixXd::Constant(6, 3, 4.5)) == kDegenerateBandwidth);
    CHECK_THROWS_AS(median_bandwidth(MatrixXd::Zero(1, 2)), ValidationError);

    const MatrixXd x = normal_matrix(50, 3, 4);
    std::vector<double> d;
    for (Index i = 0; i < 50; ++i)
    {
        for (Index j = i + 1; j < 50; ++j)
        {
            d.push_back((x.row(i) - x.row(j)).norm());
        }
    }
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size(); // 1225, odd
    const double oracle = m % 2 == 1 ? d[m / 2] : (d[m / 2 - 1] + d[m / 2]) / 2.0;
    CHECK(median_bandwidth(x) == doctest::Approx(oracle).epsilon(1e-15));

    // permutation invariance and scale equivariance
    const MatrixXd flipped = x.colwise().reverse();
    CHECK(median_bandwidth(flipped) == doctest::Approx(oracle).epsilon(1e-15));
    const MatrixXd scaled = 3.5 * x;
    CHECK(median_bandwidth(scaled) == doctest::Approx(3.5 * oracle).epsilon(1e-14));
}

TEST_CASE("cholesky of identity")
{
    const GramFactord f = cholesky_factor(MatrixXd::Identity(3, 3), 1e-10);
    CHECK(f.rank() == 3);
    CHECK(max_abs_diff(f.factor, MatrixXd::Identity(3, 3)) == 0.0);
}

TEST_CASE("cholesky of a rank-one matrix")
{
    Eigen::Vector2d v(1.0, 2.0);
    const MatrixXd k = v * v.transpose();
    const GramFactord f = cholesky_factor(k);
    CHECK(f.rank() == 1);
    CHECK(f.rows() == 2);
    CHECK(max_abs_diff(f.factor * f.factor.transpose(), k) < 1e-14);
}

TEST_CASE("cholesky recovers the numerical rank")
{
    const MatrixXd a = normal_matrix(20, 7, 5);
    const MatrixXd k = a * a.transpose();
    const GramFactord f = cholesky_factor(k);
    CHECK(f.rank() == 7);
    CHECK(max_abs_diff(f.factor * f.factor.transpose(), k) <= 1e-8);
}

TEST_CASE("cholesky rejects indefinite and asymmetric input")
{
    MatrixXd k = MatrixXd::Identity(3, 3);
    k(2, 2) = -1.0;
    CHECK_THROWS_AS(cholesky_factor(k), ValidationError);
    MatrixXd off(2, 2);
    off << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3, -1
    CHECK_THROWS_AS(cholesky_factor(off), ValidationError);
    MatrixXd asym = MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(cholesky_factor(asym), ValidationError);
}

TEST_CASE("kernel factor round trip")
{
    const MatrixXd x = normal_matrix(120, 2, 6);
    const KernelSpec spec = KernelSpec::rbf(0.9, 2);
    const MatrixXd k = gram_matrix(x, spec);
    const GramFactord f = kernel_factor(x, spec);
    CHECK(f.rank() <= 120);
    CHECK(max_abs_diff(f.factor * f.factor.transpose(), k) <= kCholeskyReconstructionTol);
    const GramFactord g = cholesky_factor(k);
    CHECK(max_abs_diff(g.factor * g.factor.transpose(), k) <= kCholeskyReconstructionTol);
}

TEST_CASE("pivoted cholesky honors max rank")
{
    const MatrixXd x = normal_matrix(60, 3, 7);
    const GramFactord f = kernel_factor(x, KernelSpec::rbf(1.0, 3), 1e-12, 10);
    CHECK(f.rank() == 10);
}

TEST_CASE("centering")
{
    const MatrixXd ones = MatrixXd::Ones(4, 1);
    CHECK(center_factor(ones).cwiseAbs().maxCoeff() == 0.0);
    Eigen::Vector3d c(1.0, 2.0, 3.0);
    CHECK(max_abs_diff(center_factor(c), Eigen::Vector3d(-1.0, 0.0, 1.0)) == 0.0);

    const MatrixXd m = normal_matrix(30, 5, 8);
    const MatrixXd h = MatrixXd::Identity(30, 30) - MatrixXd::Constant(30, 30, 1.0 / 30.0);
    const MatrixXd centered = center_factor(m);
    CHECK(max_abs_diff(centered, h * m) < 1e-13);
    CHECK(centered.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9 * 30 * m.cwiseAbs().maxCoeff());
    CHECK(max_abs_diff(center_factor(centered), centered) <= 1e-12 * centered.cwiseAbs().maxCoeff());
}
