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
/// \file data.hpp
///
/// Datasets (X, Y, S), the Gaussian toy generator, CSV + schema I/O,
/// max-divide preprocessing and seeded splitting.
///
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ktrade/common.hpp"
#include "ktrade/random.hpp"

namespace ktrade
{

enum class ColumnType
{
    Continuous,
    Categorical,
};

enum class Role
{
    X,
    Y,
    S,
};

/// Target Y or semantic attribute S.
///
/// A categorical attribute is one column of integer codes in [0, classes);
/// `labels[c]` is the text for code c. A continuous attribute may span
/// several columns.
struct Attribute
{
    MatrixXd values;
    bool categorical = false;
    std::vector<std::string> labels;
    std::vector<std::string> names;

    Index num_classes() const { return static_cast<Index>(labels.size()); }
    /// Codes as integers; only valid for categorical attributes.
    Eigen::VectorXi codes() const;
    /// One-hot rows for categorical attributes, raw values otherwise.
    MatrixXd as_vectors() const;
};

struct XColumn
{
    std::string name;
    ColumnType type = ColumnType::Continuous;
    std::vector<std::string> labels; // categorical only
};

struct Dataset
{
    MatrixXd x;
    std::vector<XColumn> x_columns;
    Attribute y;
    Attribute s;

    Index size() const { return x.rows(); }
    /// Throws ValidationError on non-finite entries, bad codes or row mismatch.
    void validate() const;
};

Dataset subset(const Dataset& data, const std::vector<Index>& rows);

// --- Gaussian toy ---------------------------------------------------------

/// |U_i| > kToyThreshold marks bit i of the 16-class target.
inline constexpr double kToyThreshold = 0.6744;
inline constexpr double kToyNoise = 0.005;

/// U, N ~ N(0, I_4) independent; X = cos(pi U / 6) + 0.005 N;
/// S = [sin(pi U_1:2 / 6), cos(pi U_3:4 / 6)];
/// Y = sum_i 2^(i-1) 1{|U_i| > 0.6744} (bit 1 least significant).
Dataset gen_gaussian_toy(Index n, std::uint64_t seed);

/// Draws n joint (X, S) samples.
using JointSampler = std::function<std::pair<MatrixXd, MatrixXd>(Rng&, Index)>;

/// (X, S) marginal of the toy dataset.
JointSampler toy_sampler();

// --- CSV ------------------------------------------------------------------

struct ColumnSchema
{
    Role role = Role::X;
    ColumnType type = ColumnType::Continuous;
    /// Optional fixed category order; first-appearance order otherwise.
    std::vector<std::string> categories;
};

using Schema = std::map<std::string, ColumnSchema>;

Schema load_schema(const std::string& path);
void save_schema(const Schema& schema, const std::string& path);
Schema parse_schema_json(const std::string& text);
std::string schema_to_json(const Schema& schema);

/// Schema describing `data`, with its category orders pinned.
Schema schema_of(const Dataset& data);

Dataset load_csv(const std::string& path, const Schema& schema);
Dataset parse_csv(const std::string& text, const Schema& schema);
void save_csv(const Dataset& data, const std::string& path);
std::string to_csv(const Dataset& data);

// --- preprocessing --------------------------------------------------------

enum class ScalePolicy
{
    None,
    MaxDivide,
};

/// Per-column transform fitted on the training split and reused on the others.
/// Continuous columns are divided by their training max |value|; categorical
/// columns are expanded to one-hot blocks.
struct Preprocessor
{
    std::vector<XColumn> columns;
    std::vector<double> divisors;
    std::vector<std::string> warnings;

    Dataset apply(const Dataset& data) const;
    Index output_dim() const;
};

Preprocessor fit_preprocessor(const Dataset& train, ScalePolicy policy);

// --- splitting ------------------------------------------------------------

struct SplitSpec
{
    std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    std::uint64_t seed = 0;

    void validate() const;
};

struct DatasetSplits
{
    Dataset train;
    Dataset val;
    Dataset test;
    std::array<std::vector<Index>, 3> indices;
};

/// Seeded Fisher-Yates shuffle, then contiguous blocks of
/// round(n f_train), round(n f_val) and the remainder.
std::array<std::vector<Index>, 3> split_indices(Index n, const SplitSpec& spec);
DatasetSplits split(const Dataset& data, const SplitSpec& spec);

} // namespace ktrade
