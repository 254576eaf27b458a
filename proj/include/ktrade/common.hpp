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
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ktrade
{

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

/// Base of every error thrown by the library. The CLI maps the concrete
/// subclass to its exit code.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: shapes, ranges, malformed configs or files.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// A factorization or solve broke down.
class NumericalError : public Error
{
public:
    using Error::Error;
};

/// File system or parse failure.
class IoError : public Error
{
public:
    using Error::Error;
};

namespace detail
{
inline std::string shape(Index rows, Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}
} // namespace detail

} // namespace ktrade
