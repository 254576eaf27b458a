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
/// \file pipeline.hpp
///
/// Run configuration and the end-to-end commands behind the CLI:
/// gen-toy, sweep, eval and plot-data.
///
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ktrade/data.hpp"
#include "ktrade/serialize.hpp"
#include "ktrade/solver.hpp"
#include "ktrade/tradeoff.hpp"

namespace ktrade
{

inline constexpr const char* kVersion = "1.0.0";

enum class GridSpacing
{
    Linear,        // uniform in lambda over [0, 1 - 1e-6]
    LogComplement, // 1 - lambda log-uniform from 1 down to 1e-6
};

/// `count` points of the given spacing; `refine` adds 1 - 10^-k for
/// k = 1..6. Sorted, duplicates removed.
std::vector<double> lambda_grid(Index count, GridSpacing spacing, bool refine);

struct ToySource
{
    Index n = 18000;
    std::uint64_t seed = 0;
};

struct RunConfig
{
    // dataset: exactly one of toy / csv
    std::optional<ToySource> toy;
    std::string csv_path;
    std::string schema_path;

    SplitSpec split;
    ScalePolicy preprocess = ScalePolicy::None;
    KernelConfig kernels;
    std::vector<double> gammas{1e-4};
    std::vector<double> lambdas;
    double head_ridge = kDefaultHeadRidge;
    EvaluateOptions eval;
    std::vector<Split> splits{Split::Train, Split::Val, Split::Test};
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    unsigned threads = 1;
    bool save_models = true;
};

/// Parses and validates a JSON config. Relative paths resolve against
/// `base_dir`. Errors are ValidationError prefixed with the field path.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

/// Canonical form of the result-affecting settings (no output_dir, threads).
nlohmann::json config_to_json(const RunConfig& cfg);

/// FNV-1a 64 over the canonical config and the dataset CSV, as 16 hex digits.
std::string config_digest(const RunConfig& cfg, const Dataset& data);

Dataset load_dataset(const RunConfig& cfg);

// --- commands -------------------------------------------------------------

/// Writes `out` and its schema next to it (`<stem>.schema.json`).
/// Returns the schema path.
std::string cmd_gen_toy(Index n, std::uint64_t seed, const std::string& out);

struct SweepOutputs
{
    TradeoffCurve curve;
    std::string digest;
    std::vector<std::string> files;
};

/// data -> preprocess -> kernels -> solver -> tradeoff; writes curve.csv,
/// curve.json, plot/<panel>.<split>.csv, models/lambda_<i>.json,
/// data/{train,val,test}.csv + data/schema.json and manifest.json under
/// cfg.output_dir.
SweepOutputs cmd_sweep(const RunConfig& cfg);

/// Scores raw data with a saved model; the report as JSON.
nlohmann::json cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& schema_path);

/// Writes one panel of a curve CSV; split defaults to default_plot_split.
void cmd_plot_data(const std::string& curve_path, PlotPanel panel, const std::string& out,
                   std::optional<Split> split = std::nullopt);

} // namespace ktrade
