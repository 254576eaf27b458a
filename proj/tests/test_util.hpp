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

// Shared fixtures for the unit tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <string>

#include "ktrade/common.hpp"
#include "ktrade/data.hpp"
#include "ktrade/random.hpp"

namespace ktrade::testing
{

inline MatrixXd normal_matrix(Index rows, Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        for (Index j = 0; j < cols; ++j)
        {
            m(i, j) = rng.normal();
        }
    }
    return m;
}

inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline Attribute continuous(const MatrixXd& values, const std::string& name)
{
    Attribute a;
    a.values = values;
    for (Index c = 0; c < values.cols(); ++c)
    {
        a.names.push_back(name + std::to_string(c));
    }
    return a;
}

inline Attribute categorical(const Eigen::VectorXi& codes, Index classes, const std::string& name)
{
    Attribute a;
    a.categorical = true;
    a.values = codes.cast<double>();
    a.names = {name};
    for (Index c = 0; c < classes; ++c)
    {
        a.labels.push_back(std::to_string(c));
    }
    return a;
}

inline Dataset make_dataset(const MatrixXd& x, Attribute y, Attribute s)
{
    Dataset d;
    d.x = x;
    for (Index c = 0; c < x.cols(); ++c)
    {
        d.x_columns.push_back({"x" + std::to_string(c), ColumnType::Continuous, {}});
    }
    d.y = std::move(y);
    d.s = std::move(s);
    d.validate();
    return d;
}

/// Continuous regression data: Y and S both depend on X.
inline Dataset regression_dataset(Index n, std::uint64_t seed)
{
    const MatrixXd x = normal_matrix(n, 3, seed);
    const MatrixXd noise = normal_matrix(n, 2, seed + 1000);
    MatrixXd y(n, 1), s(n, 1);
    for (Index i = 0; i < n; ++i)
    {
        y(i, 0) = std::sin(x(i, 0)) + 0.5 * x(i, 1) * x(i, 2) + 0.1 * noise(i, 0);
        s(i, 0) = std::cos(x(i, 1)) + 0.5 * x(i, 0) + 0.1 * noise(i, 1);
    }
    return make_dataset(x, continuous(y, "y"), continuous(s, "s"));
}

} // namespace ktrade::testing
