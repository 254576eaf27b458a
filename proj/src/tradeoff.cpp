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

#include "ktrade/tradeoff.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>

namespace ktrade
{

std::string to_string(Split split)
{
    switch (split)
    {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "?";
}

Split split_from_string(const std::string& name)
{
    if (name == "train")
    {
        return Split::Train;
    }
    if (name == "val" || name == "validation")
    {
        return Split::Val;
    }
    if (name == "test")
    {
        return Split::Test;
    }
    throw ValidationError("unknown split '" + name + "' (expected train, val or test)");
}

std::string to_string(InvarianceMetric metric)
{
    switch (metric)
    {
    case InvarianceMetric::Auto:
        return "auto";
    case InvarianceMetric::Kcc:
        return "kcc";
    case InvarianceMetric::Dpv:
        return "dpv";
    }
    return "?";
}

InvarianceMetric invariance_metric_from_string(const std::string& name)
{
    if (name == "auto")
    {
        return InvarianceMetric::Auto;
    }
    if (name == "kcc")
    {
        return InvarianceMetric::Kcc;
    }
    if (name == "dpv")
    {
        return InvarianceMetric::Dpv;
    }
    throw ValidationError("unknown invariance metric '" + name + "' (expected auto, kcc or dpv)");
}

InvarianceMetric resolve_metric(InvarianceMetric metric, const Attribute& y, const Attribute& s)
{
    const bool categorical = y.categorical && s.categorical;
    if (metric == InvarianceMetric::Auto)
    {
        return categorical ? InvarianceMetric::Dpv : InvarianceMetric::Kcc;
    }
    if (metric == InvarianceMetric::Dpv && !categorical)
    {
        throw ValidationError("dpv needs a categorical target and a categorical semantic attribute");
    }
    return metric;
}

// --- linear head ----------------------------------------------------------

MatrixXd LinearHead::scores(const MatrixXd& z) const
{
    if (z.cols() != weights.rows())
    {
        throw ValidationError("linear head expects " + std::to_string(weights.rows()) + " inputs, got " +
                              std::to_string(z.cols()));
    }
    MatrixXd out = z * weights;
    out.rowwise() += bias.transpose();
    return out;
}

Eigen::VectorXi LinearHead::predict_classes(const MatrixXd& z) const
{
    if (task != Task::Classification)
    {
        throw ValidationError("predict_classes called on a regression head");
    }
    const MatrixXd s = scores(z);
    Eigen::VectorXi out(s.rows());
    for (Index i = 0; i < s.rows(); ++i)
    {
        Index best = 0;
        for (Index c = 1; c < s.cols(); ++c)
        {
            if (s(i, c) > s(i, best))
            {
                best = c;
            }
        }
        out(i) = static_cast<int>(best);
    }
    return out;
}

double LinearHead::utility(const MatrixXd& z, const Attribute& y) const
{
    if (z.rows() != y.values.rows())
    {
        throw ValidationError("utility: " + std::to_string(z.rows()) + " embeddings but " +
                              std::to_string(y.values.rows()) + " targets");
    }
    if (z.rows() == 0)
    {
        return 0.0;
    }
    if (task == Task::Classification)
    {
        if (!y.categorical)
        {
            throw ValidationError("classification head evaluated on a continuous target");
        }
        const Eigen::VectorXi pred = predict_classes(z);
        const Eigen::VectorXi truth = y.codes();
        return static_cast<double>((pred.array() == truth.array()).count()) / static_cast<double>(z.rows());
    }
    const MatrixXd pred = scores(z);
    if (pred.cols() != y.values.cols())
    {
        throw ValidationError("regression head has " + std::to_string(pred.cols()) + " outputs, target has " +
                              std::to_string(y.values.cols()));
    }
    return -(pred - y.values).squaredNorm() / static_cast<double>(pred.size());
}

LinearHead train_target_head(const MatrixXd& z, const MatrixXd& targets, Task task, double ridge)
{
    const Index n = z.rows();
    if (targets.rows() != n)
    {
        throw ValidationError("train_target_head: " + std::to_string(n) + " embeddings but " +
                              std::to_string(targets.rows()) + " targets");
    }
    if (n == 0)
    {
        throw ValidationError("train_target_head: empty training set");
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge))
    {
        throw ValidationError("train_target_head: ridge must be non-negative");
    }
    LinearHead head;
    head.task = task;
    const VectorXd z_mean = z.colwise().mean().transpose();
    const VectorXd t_mean = targets.colwise().mean().transpose();
    head.weights = MatrixXd::Zero(z.cols(), targets.cols());
    if (z.cols() > 0 && z.cwiseAbs().maxCoeff() > 0.0)
    {
        const MatrixXd zc = center_factor(z);
        MatrixXd gram = zc.transpose() * zc;
        gram.diagonal().array() += ridge;
        const Eigen::LDLT<MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success)
        {
            throw NumericalError("train_target_head: normal equations are singular");
        }
        head.weights = ldlt.solve(zc.transpose() * center_factor(targets));
        if (!head.weights.allFinite())
        {
            throw NumericalError("train_target_head: normal equations are singular; use a positive ridge");
        }
    }
    head.bias = t_mean - head.weights.transpose() * z_mean;
    return head;
}

LinearHead train_target_head(const MatrixXd& z, const Attribute& y, double ridge)
{
    LinearHead head =
        train_target_head(z, y.as_vectors(), y.categorical ? Task::Classification : Task::Regression, ridge);
    head.labels = y.categorical ? y.labels : y.names;
    return head;
}

// --- evaluation -----------------------------------------------------------

std::vector<TradeoffPoint> TradeoffCurve::for_split(Split split) const
{
    std::vector<TradeoffPoint> out;
    for (const auto& p : points)
    {
        if (p.split == split)
        {
            out.push_back(p);
        }
    }
    return out;
}

EvaluationData prepare_evaluation(const Dataset& data, Split split, const KernelSpec& y_spec,
                                  const KernelSpec& s_spec, InvarianceMetric metric, const KccOptions& kcc)
{
    EvaluationData out;
    out.split = split;
    out.y = data.y;
    out.s = data.s;
    out.y_factor = kernel_factor(kernel_points(data.y, y_spec.family), y_spec);
    out.s_factor = kernel_factor(kernel_points(data.s, s_spec.family), s_spec);
    out.metric = resolve_metric(metric, data.y, data.s);
    metric = out.metric;
    if (metric == InvarianceMetric::Kcc)
    {
        const MatrixXd points = data.s.as_vectors();
        out.kcc = kcc;
        out.s_kcc = kcc_side(points, KernelSpec::rbf(kcc_bandwidth(points), points.cols()), kcc);
    }
    return out;
}

TradeoffPoint evaluate_embedding(const MatrixXd& z, const LinearHead& head, const EvaluationData& data)
{
    TradeoffPoint p;
    p.split = data.split;
    p.dep_zy = dep_emp_embedded(z, data.y_factor);
    p.dep_zs = dep_emp_embedded(z, data.s_factor);
    p.utility = head.utility(z, data.y);
    if (data.metric == InvarianceMetric::Dpv)
    {
        p.invariance = dpv(head.predict_classes(z), data.s.codes());
    }
    else if (z.cols() > 0)
    {
        p.invariance = kcc_emp(kcc_side(z, KernelSpec::rbf(kcc_bandwidth(z), z.cols()), data.kcc), data.s_kcc);
    }
    return p;
}

TradeoffPoint evaluate(const EncoderModel& model, const LinearHead& head, const Dataset& data, Split split,
                       const EvaluateOptions& options)
{
    const EvaluationData prepared = prepare_evaluation(data, split, model.y_kernel, model.s_kernel, options.metric, options.kcc);
    TradeoffPoint p = evaluate_embedding(encode(model, data.x), head, prepared);
    p.lambda = model.lambda;
    p.gamma = model.gamma;
    p.r_opt = model.r;
    p.objective = model.objective;
    return p;
}

// --- sweep ----------------------------------------------------------------

void validate_lambda_grid(const std::vector<double>& lambdas)
{
    if (lambdas.empty())
    {
        throw ValidationError("lambda grid is empty");
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i)
    {
        const double l = lambdas[i];
        if (!(l >= 0.0 && l <= kMaxLambda))
        {
            std::ostringstream msg;
            msg << "lambda grid value " << l << " lies outside [0, 1 - 1e-6]";
            throw ValidationError(msg.str());
        }
        if (i > 0 && !(l > lambdas[i - 1]))
        {
            throw ValidationError("lambda grid must be strictly increasing");
        }
    }
}

namespace
{

// Rethrows with the failing lambda prepended, keeping the error category.
[[noreturn]] void rethrow_with_lambda(const std::exception_ptr& error, double lambda)
{
    std::ostringstream prefix;
    prefix.precision(17);
    prefix << "lambda = " << lambda << ": ";
    try
    {
        std::rethrow_exception(error);
    }
    catch (const NumericalError& e)
    {
        throw NumericalError(prefix.str() + e.what());
    }
    catch (const ValidationError& e)
    {
        throw ValidationError(prefix.str() + e.what());
    }
    catch (const IoError& e)
    {
        throw IoError(prefix.str() + e.what());
    }
    catch (const std::exception& e)
    {
        throw Error(prefix.str() + e.what());
    }
}

struct LambdaResult
{
    std::vector<TradeoffPoint> points;
    std::optional<EncoderModel> model;
    std::optional<LinearHead> head;
};

} // namespace

SweepResult sweep(const DatasetSplits& data, const KernelConfig& kernels, const SweepOptions& options)
{
    validate_lambda_grid(options.lambdas);
    if (options.gammas.empty())
    {
        throw ValidationError("no gamma given");
    }
    for (const double g : options.gammas)
    {
        if (!(g > 0.0 && std::isfinite(g)))
        {
            throw ValidationError("gamma must be positive, got " + std::to_string(g));
        }
    }
    if (options.splits.empty())
    {
        throw ValidationError("no evaluation split requested");
    }
    if (!(options.head_ridge >= 0.0))
    {
        throw ValidationError("head ridge must be non-negative");
    }
    const bool select_gamma = options.gammas.size() > 1;

    const TrainingFactors factors = build_training_factors(data.train, kernels);
    const PencilBlocks blocks = prepare_pencil(factors.x, factors.y, factors.s);
    const KernelContext& ctx = factors.x_context;
    // Z = features * Theta^T for any split.
    const auto features = [&](const Dataset& d) -> MatrixXd {
        if (ctx.path == EncoderPath::Rff)
        {
            return feature_matrix(d.x, ctx.rff).factor;
        }
        return cross_gram(d.x, ctx.train_points, ctx.spec);
    };
    const auto split_data = [&](Split s) -> const Dataset& {
        switch (s)
        {
        case Split::Train:
            return data.train;
        case Split::Val:
            return data.val;
        case Split::Test:
            break;
        }
        return data.test;
    };

    const MatrixXd train_features = features(data.train);
    MatrixXd val_features;
    if (select_gamma)
    {
        val_features = features(data.val);
    }
    std::vector<EvaluationData> evals;
    std::vector<MatrixXd> eval_features;
    for (const Split s : options.splits)
    {
        evals.push_back(
            prepare_evaluation(split_data(s), s, factors.y_spec, factors.s_spec, options.eval.metric, options.eval.kcc));
        eval_features.push_back(s == Split::Train ? train_features : features(split_data(s)));
    }

    const auto run = [&](double lambda) {
        LambdaResult out;
        std::optional<EncoderModel> best_model;
        std::optional<LinearHead> best_head;
        double best_utility = 0.0;
        for (const double gamma : options.gammas)
        {
            const EigenSolution sol = solve_pencil(assemble_pencil(blocks, lambda, gamma));
            EncoderModel model = make_encoder(factors, sol, lambda, gamma, optimal_dim(sol.eigenvalues, pencil_unit(blocks.n)));
            LinearHead head =
                train_target_head(train_features * model.theta.transpose(), data.train.y, options.head_ridge);
            if (!select_gamma)
            {
                best_model = std::move(model);
                best_head = std::move(head);
                break;
            }
            const double u = head.utility(val_features * model.theta.transpose(), data.val.y);
            if (!best_model || u > best_utility)
            {
                best_utility = u;
                best_model = std::move(model);
                best_head = std::move(head);
            }
        }
        for (std::size_t k = 0; k < evals.size(); ++k)
        {
            const MatrixXd z = eval_features[k] * best_model->theta.transpose();
            TradeoffPoint p = evaluate_embedding(z, *best_head, evals[k]);
            p.lambda = lambda;
            p.gamma = best_model->gamma;
            p.r_opt = best_model->r;
            p.objective = best_model->objective;
            out.points.push_back(p);
        }
        if (options.keep_models)
        {
            out.model = std::move(best_model);
            out.head = std::move(best_head);
        }
        return out;
    };

    const std::size_t count = options.lambdas.size();
    std::vector<LambdaResult> results(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    const auto worker = [&]() {
        for (std::size_t i = next++; i < count && !failed; i = next++)
        {
            try
            {
                results[i] = run(options.lambdas[i]);
            }
            catch (...)
            {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(count)));
    if (threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
        {
            pool.emplace_back(worker);
        }
        for (auto& t : pool)
        {
            t.join();
        }
    }
    for (std::size_t i = 0; i < count; ++i)
    {
        if (errors[i])
        {
            rethrow_with_lambda(errors[i], options.lambdas[i]);
        }
    }

    SweepResult result;
    for (auto& r : results)
    {
        result.curve.points.insert(result.curve.points.end(), r.points.begin(), r.points.end());
        if (options.keep_models)
        {
            result.models.push_back(std::move(*r.model));
            result.heads.push_back(std::move(*r.head));
        }
    }
    return result;
}

} // namespace ktrade
