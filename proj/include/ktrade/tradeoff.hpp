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
/// \file tradeoff.hpp
///
/// Lambda sweeps: fit the encoder per trade-off value, train a linear head
/// on the training embedding and report utility and invariance per split.
///
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ktrade/common.hpp"
#include "ktrade/data.hpp"
#include "ktrade/dependence.hpp"
#include "ktrade/solver.hpp"

namespace ktrade
{

enum class Task
{
    Classification,
    Regression,
};

enum class Split
{
    Train,
    Val,
    Test,
};

std::string to_string(Split split);
Split split_from_string(const std::string& name);

enum class InvarianceMetric
{
    Auto, // KCC for continuous S, DPV for categorical S
    Kcc,
    Dpv,
};

std::string to_string(InvarianceMetric metric);
InvarianceMetric invariance_metric_from_string(const std::string& name);

/// Resolves Auto: DPV when both Y and S are categorical, KCC otherwise.
/// Throws if DPV is requested for data it does not apply to.
InvarianceMetric resolve_metric(InvarianceMetric metric, const Attribute& y, const Attribute& s);

/// y_hat = W^T z + b. Classification heads regress one-hot targets and
/// predict the argmax (lowest index on ties).
struct LinearHead
{
    Task task = Task::Classification;
    MatrixXd weights; // r x k
    VectorXd bias;    // k
    std::vector<std::string> labels;

    MatrixXd scores(const MatrixXd& z) const;
    Eigen::VectorXi predict_classes(const MatrixXd& z) const;
    /// Accuracy for classification, negative mean squared error otherwise.
    double utility(const MatrixXd& z, const Attribute& y) const;
};

inline constexpr double kDefaultHeadRidge = 1e-6;

/// Ridge least squares with an unpenalized intercept:
/// W = (Zc^T Zc + ridge I)^-1 Zc^T Tc on centered Z and targets.
/// An empty or all-zero Z gives the constant predictor.
LinearHead train_target_head(const MatrixXd& z, const MatrixXd& targets, Task task, double ridge = kDefaultHeadRidge);
LinearHead train_target_head(const MatrixXd& z, const Attribute& y, double ridge = kDefaultHeadRidge);

struct TradeoffPoint
{
    double lambda = 0.0;
    double gamma = 0.0;
    Index r_opt = 0;
    double dep_zy = 0.0;
    double dep_zs = 0.0;
    double objective = 0.0;
    double utility = 0.0;
    double invariance = 0.0;
    Split split = Split::Test;
};

struct TradeoffCurve
{
    /// Sorted by lambda, then by split.
    std::vector<TradeoffPoint> points;
    std::string digest;

    std::vector<TradeoffPoint> for_split(Split split) const;
};

/// One evaluation split with the attribute factors it needs, built once and
/// reused across lambdas.
struct EvaluationData
{
    Split split = Split::Test;
    Attribute y;
    Attribute s;
    GramFactord y_factor;
    GramFactord s_factor;
    InvarianceMetric metric = InvarianceMetric::Kcc;
    KccOptions kcc;
    KccSide s_kcc; // kcc only
};

EvaluationData prepare_evaluation(const Dataset& data, Split split, const KernelSpec& y_spec,
                                  const KernelSpec& s_spec, InvarianceMetric metric, const KccOptions& kcc = {});

struct EvaluateOptions
{
    InvarianceMetric metric = InvarianceMetric::Auto;
    KccOptions kcc;
};

/// Metrics of an embedding Z of `data`; lambda, gamma, r and objective are
/// left for the caller.
TradeoffPoint evaluate_embedding(const MatrixXd& z, const LinearHead& head, const EvaluationData& data);

TradeoffPoint evaluate(const EncoderModel& model, const LinearHead& head, const Dataset& data, Split split,
                       const EvaluateOptions& options = {});

struct SweepOptions
{
    std::vector<double> lambdas;
    /// One value: fixed gamma. Several: per-lambda choice by validation utility.
    std::vector<double> gammas{1e-4};
    double head_ridge = kDefaultHeadRidge;
    EvaluateOptions eval;
    std::vector<Split> splits{Split::Train, Split::Val, Split::Test};
    /// 0 or 1 runs sequentially.
    unsigned threads = 1;
    bool keep_models = false;
};

struct SweepResult
{
    TradeoffCurve curve;
    /// Filled when keep_models is set; one per lambda.
    std::vector<EncoderModel> models;
    std::vector<LinearHead> heads;
};

/// Lambda grid check: sorted, strictly increasing, inside [0, 1 - 1e-6].
void validate_lambda_grid(const std::vector<double>& lambdas);

SweepResult sweep(const DatasetSplits& data, const KernelConfig& kernels, const SweepOptions& options);

} // namespace ktrade
