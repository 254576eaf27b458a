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
/// \file serialize.hpp
///
/// On-disk formats: fitted models (versioned JSON), trade-off curves
/// (CSV and JSON) and two-column plot data.
///
/// Matrices are stored as {"rows", "cols", "data"} with `data` row-major.
/// Doubles are written as JSON numbers in shortest round-trip decimal form,
/// so a save/load cycle is exact.
///
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ktrade/data.hpp"
#include "ktrade/solver.hpp"
#include "ktrade/tradeoff.hpp"

namespace ktrade
{

inline constexpr int kModelFormatVersion = 1;

/// Everything cmd_eval needs to score raw data: preprocessing, encoder and
/// target head.
struct ModelBundle
{
    EncoderModel encoder;
    LinearHead head;
    Preprocessor preprocess;
    EvaluateOptions eval;
    std::string digest;
};

nlohmann::json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);

nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const ModelBundle& model);
ModelBundle model_from_json(const nlohmann::json& j);
void save_model(const ModelBundle& model, const std::string& path);
ModelBundle load_model(const std::string& path);

// --- curves ---------------------------------------------------------------

/// Header: lambda,r_opt,dep_zy,dep_zs,objective,utility,invariance,split.
std::string curve_to_csv(const TradeoffCurve& curve);
TradeoffCurve curve_from_csv(const std::string& text);
TradeoffCurve load_curve_csv(const std::string& path);

nlohmann::json curve_to_json(const TradeoffCurve& curve);
TradeoffCurve curve_from_json(const nlohmann::json& j);

enum class PlotPanel
{
    UtilityInvariance, // x = invariance, y = utility
    DepYDepS,          // x = dep_zs, y = dep_zy
    InvarianceDepS,    // x = dep_zs, y = invariance
    RoptLambda,        // x = 1 - lambda, y = r_opt
};

std::string to_string(PlotPanel panel);
PlotPanel plot_panel_from_string(const std::string& name);
const std::vector<PlotPanel>& all_plot_panels();

/// Two-column CSV of one panel for the points of one split.
std::string plot_data(const TradeoffCurve& curve, PlotPanel panel, Split split);

/// Test if present, else the first split in the curve.
Split default_plot_split(const TradeoffCurve& curve);

} // namespace ktrade
