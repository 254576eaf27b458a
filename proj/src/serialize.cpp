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

#include "ktrade/serialize.hpp"

#include <charconv>
#include <sstream>

#include "ktrade/io.hpp"

namespace ktrade
{

using nlohmann::json;

namespace
{

const char* const kCurveHeader = "lambda,r_opt,dep_zy,dep_zs,objective,utility,invariance,split";

VectorXd vector_from_json(const json& j, const std::string& what)
{
    if (!j.is_array())
    {
        throw ValidationError(what + ": expected an array");
    }
    VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        if (!j[i].is_number())
        {
            throw ValidationError(what + "[" + std::to_string(i) + "]: expected a number");
        }
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

json vector_to_json(const VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json preprocess_to_json(const Preprocessor& pre)
{
    json cols = json::array();
    for (std::size_t c = 0; c < pre.columns.size(); ++c)
    {
        const auto& col = pre.columns[c];
        json entry{{"name", col.name},
                   {"type", col.type == ColumnType::Categorical ? "categorical" : "continuous"},
                   {"divisor", pre.divisors[c]}};
        if (col.type == ColumnType::Categorical)
        {
            entry["categories"] = col.labels;
        }
        cols.push_back(entry);
    }
    return json{{"columns", cols}};
}

Preprocessor preprocess_from_json(const json& j)
{
    Preprocessor pre;
    for (const auto& entry : j.at("columns"))
    {
        XColumn col;
        col.name = entry.at("name").get<std::string>();
        const std::string type = entry.at("type").get<std::string>();
        if (type == "categorical")
        {
            col.type = ColumnType::Categorical;
            col.labels = entry.at("categories").get<std::vector<std::string>>();
        }
        else if (type != "continuous")
        {
            throw ValidationError("preprocess column '" + col.name + "': unknown type '" + type + "'");
        }
        pre.columns.push_back(col);
        pre.divisors.push_back(entry.at("divisor").get<double>());
    }
    return pre;
}

} // namespace

json matrix_to_json(const MatrixXd& m)
{
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
    {
        for (Index j = 0; j < m.cols(); ++j)
        {
            data.push_back(m(i, j));
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const json& j, const std::string& what)
{
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    {
        throw ValidationError(what + ": expected {rows, cols, data}");
    }
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const VectorXd data = vector_from_json(j.at("data"), what + ".data");
    if (rows < 0 || cols < 0 || data.size() != rows * cols)
    {
        throw ValidationError(what + ": data has " + std::to_string(data.size()) + " entries for a " +
                              detail::shape(rows, cols) + " matrix");
    }
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        for (Index c = 0; c < cols; ++c)
        {
            m(i, c) = data(i * cols + c);
        }
    }
    return m;
}

json kernel_spec_to_json(const KernelSpec& spec)
{
    return json{{"family", to_string(spec.family)}, {"bandwidth", spec.bandwidth}, {"input_dim", spec.input_dim}};
}

KernelSpec kernel_spec_from_json(const json& j)
{
    KernelSpec spec;
    spec.family = kernel_family_from_string(j.at("family").get<std::string>());
    spec.bandwidth = j.at("bandwidth").get<double>();
    spec.input_dim = j.at("input_dim").get<Index>();
    spec.validate();
    return spec;
}

json model_to_json(const ModelBundle& model)
{
    const EncoderModel& enc = model.encoder;
    json kernel = kernel_spec_to_json(enc.kernel.spec);
    if (enc.kernel.path == EncoderPath::Rff)
    {
        kernel["path"] = "rff";
        kernel["rff"] = json{{"seed", enc.kernel.rff.seed},
                             {"bandwidth", enc.kernel.rff.bandwidth},
                             {"weights", matrix_to_json(enc.kernel.rff.weights)},
                             {"phases", vector_to_json(enc.kernel.rff.phases)}};
    }
    else
    {
        kernel["path"] = "exact";
        kernel["train_points"] = matrix_to_json(enc.kernel.train_points);
    }
    json head{{"task", model.head.task == Task::Classification ? "classification" : "regression"},
              {"weights", matrix_to_json(model.head.weights)},
              {"bias", vector_to_json(model.head.bias)},
              {"labels", model.head.labels}};
    json eval{{"invariance", to_string(model.eval.metric)},
              {"kcc", {{"reg", model.eval.kcc.reg},
                       {"pivot_tol", model.eval.kcc.pivot_tol},
                       {"max_rank", model.eval.kcc.max_rank}}}};
    return json{{"format", "ktrade-model"},
                {"version", kModelFormatVersion},
                {"digest", model.digest},
                {"lambda", enc.lambda},
                {"gamma", enc.gamma},
                {"r", enc.r},
                {"objective", enc.objective},
                {"eigenvalues", vector_to_json(enc.eigenvalues)},
                {"kernel", kernel},
                {"y_kernel", kernel_spec_to_json(enc.y_kernel)},
                {"s_kernel", kernel_spec_to_json(enc.s_kernel)},
                {"theta", matrix_to_json(enc.theta)},
                {"head", head},
                {"evaluation", eval},
                {"preprocess", preprocess_to_json(model.preprocess)}};
}

ModelBundle model_from_json(const json& j)
{
    try
    {
        if (j.value("format", std::string()) != "ktrade-model")
        {
            throw ValidationError("not a model file (format tag missing)");
        }
        if (j.at("version").get<int>() != kModelFormatVersion)
        {
            throw ValidationError("unsupported model version " + j.at("version").dump());
        }
        ModelBundle model;
        EncoderModel& enc = model.encoder;
        model.digest = j.value("digest", std::string());
        enc.lambda = j.at("lambda").get<double>();
        enc.gamma = j.at("gamma").get<double>();
        enc.r = j.at("r").get<Index>();
        enc.objective = j.at("objective").get<double>();
        enc.eigenvalues = vector_from_json(j.at("eigenvalues"), "eigenvalues");
        const json& kernel = j.at("kernel");
        enc.kernel.spec = kernel_spec_from_json(kernel);
        const std::string path = kernel.at("path").get<std::string>();
        if (path == "rff")
        {
            enc.kernel.path = EncoderPath::Rff;
            const json& rff = kernel.at("rff");
            enc.kernel.rff.seed = rff.at("seed").get<std::uint64_t>();
            enc.kernel.rff.bandwidth = rff.at("bandwidth").get<double>();
            enc.kernel.rff.weights = matrix_from_json(rff.at("weights"), "kernel.rff.weights");
            enc.kernel.rff.phases = vector_from_json(rff.at("phases"), "kernel.rff.phases");
            if (enc.kernel.rff.phases.size() != enc.kernel.rff.weights.rows())
            {
                throw ValidationError("kernel.rff: phases do not match the weight rows");
            }
        }
        else if (path == "exact")
        {
            enc.kernel.path = EncoderPath::Exact;
            enc.kernel.train_points = matrix_from_json(kernel.at("train_points"), "kernel.train_points");
        }
        else
        {
            throw ValidationError("kernel.path: unknown value '" + path + "'");
        }
        enc.y_kernel = kernel_spec_from_json(j.at("y_kernel"));
        enc.s_kernel = kernel_spec_from_json(j.at("s_kernel"));
        enc.theta = matrix_from_json(j.at("theta"), "theta");
        const Index m = enc.kernel.path == EncoderPath::Rff ? enc.kernel.rff.weights.rows()
                                                             : enc.kernel.train_points.rows();
        if (enc.theta.rows() != enc.r || enc.theta.cols() != m)
        {
            throw ValidationError("theta is " + detail::shape(enc.theta.rows(), enc.theta.cols()) + ", expected " +
                                  detail::shape(enc.r, m));
        }

        const json& head = j.at("head");
        const std::string task = head.at("task").get<std::string>();
        model.head.task = task == "classification" ? Task::Classification : Task::Regression;
        if (task != "classification" && task != "regression")
        {
            throw ValidationError("head.task: unknown value '" + task + "'");
        }
        model.head.weights = matrix_from_json(head.at("weights"), "head.weights");
        model.head.bias = vector_from_json(head.at("bias"), "head.bias");
        model.head.labels = head.at("labels").get<std::vector<std::string>>();
        if (model.head.weights.rows() != enc.r || model.head.bias.size() != model.head.weights.cols())
        {
            throw ValidationError("head shapes do not match the encoder");
        }

        if (j.contains("evaluation"))
        {
            const json& eval = j.at("evaluation");
            model.eval.metric = invariance_metric_from_string(eval.at("invariance").get<std::string>());
            const json& kcc = eval.at("kcc");
            model.eval.kcc.reg = kcc.at("reg").get<double>();
            model.eval.kcc.pivot_tol = kcc.at("pivot_tol").get<double>();
            model.eval.kcc.max_rank = kcc.at("max_rank").get<Index>();
        }
        model.preprocess = preprocess_from_json(j.at("preprocess"));
        return model;
    }
    catch (const json::exception& e)
    {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
}

void save_model(const ModelBundle& model, const std::string& path) { write_file(path, model_to_json(model).dump(1) + "\n"); }

ModelBundle load_model(const std::string& path)
{
    const std::string text = read_file(path);
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

// --- curves ---------------------------------------------------------------

std::string curve_to_csv(const TradeoffCurve& curve)
{
    std::string out = kCurveHeader;
    out += "\n";
    for (const auto& p : curve.points)
    {
        out += format_double(p.lambda) + "," + std::to_string(p.r_opt) + "," + format_double(p.dep_zy) + "," +
               format_double(p.dep_zs) + "," + format_double(p.objective) + "," + format_double(p.utility) + "," +
               format_double(p.invariance) + "," + to_string(p.split) + "\n";
    }
    return out;
}

TradeoffCurve curve_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
    {
        throw ValidationError("curve CSV is empty");
    }
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    if (line != kCurveHeader)
    {
        throw ValidationError("curve CSV header must be '" + std::string(kCurveHeader) + "'");
    }
    TradeoffCurve curve;
    int row = 1;
    while (std::getline(in, line))
    {
        ++row;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            cells.push_back(cell);
        }
        if (cells.size() != 8)
        {
            throw ValidationError("curve CSV line " + std::to_string(row) + ": expected 8 fields");
        }
        const auto number = [&](std::size_t c) {
            double v = 0.0;
            const auto& s = cells[c];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            {
                throw ValidationError("curve CSV line " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                      ": cannot parse '" + s + "'");
            }
            return v;
        };
        TradeoffPoint p;
        p.lambda = number(0);
        p.r_opt = static_cast<Index>(number(1));
        p.dep_zy = number(2);
        p.dep_zs = number(3);
        p.objective = number(4);
        p.utility = number(5);
        p.invariance = number(6);
        p.split = split_from_string(cells[7]);
        curve.points.push_back(p);
    }
    return curve;
}

TradeoffCurve load_curve_csv(const std::string& path) { return curve_from_csv(read_file(path)); }

json curve_to_json(const TradeoffCurve& curve)
{
    json points = json::array();
    for (const auto& p : curve.points)
    {
        points.push_back(json{{"lambda", p.lambda},
                              {"gamma", p.gamma},
                              {"r_opt", p.r_opt},
                              {"dep_zy", p.dep_zy},
                              {"dep_zs", p.dep_zs},
                              {"objective", p.objective},
                              {"utility", p.utility},
                              {"invariance", p.invariance},
                              {"split", to_string(p.split)}});
    }
    return json{{"format", "ktrade-curve"}, {"version", 1}, {"digest", curve.digest}, {"points", points}};
}

TradeoffCurve curve_from_json(const json& j)
{
    try
    {
        TradeoffCurve curve;
        curve.digest = j.value("digest", std::string());
        for (const auto& e : j.at("points"))
        {
            TradeoffPoint p;
            p.lambda = e.at("lambda").get<double>();
            p.gamma = e.at("gamma").get<double>();
            p.r_opt = e.at("r_opt").get<Index>();
            p.dep_zy = e.at("dep_zy").get<double>();
            p.dep_zs = e.at("dep_zs").get<double>();
            p.objective = e.at("objective").get<double>();
            p.utility = e.at("utility").get<double>();
            p.invariance = e.at("invariance").get<double>();
            p.split = split_from_string(e.at("split").get<std::string>());
            curve.points.push_back(p);
        }
        return curve;
    }
    catch (const json::exception& e)
    {
        throw ValidationError(std::string("malformed curve: ") + e.what());
    }
}

std::string to_string(PlotPanel panel)
{
    switch (panel)
    {
    case PlotPanel::UtilityInvariance:
        return "utility-invariance";
    case PlotPanel::DepYDepS:
        return "depy-deps";
    case PlotPanel::InvarianceDepS:
        return "invariance-deps";
    case PlotPanel::RoptLambda:
        return "ropt-lambda";
    }
    return "?";
}

PlotPanel plot_panel_from_string(const std::string& name)
{
    for (const PlotPanel p : all_plot_panels())
    {
        if (to_string(p) == name)
        {
            return p;
        }
    }
    throw ValidationError("unknown panel '" + name +
                          "' (expected utility-invariance, depy-deps, invariance-deps or ropt-lambda)");
}

const std::vector<PlotPanel>& all_plot_panels()
{
    static const std::vector<PlotPanel> panels{PlotPanel::UtilityInvariance, PlotPanel::DepYDepS,
                                               PlotPanel::InvarianceDepS, PlotPanel::RoptLambda};
    return panels;
}

std::string plot_data(const TradeoffCurve& curve, PlotPanel panel, Split split)
{
    std::string out;
    switch (panel)
    {
    case PlotPanel::UtilityInvariance:
        out = "invariance,utility\n";
        break;
    case PlotPanel::DepYDepS:
        out = "dep_zs,dep_zy\n";
        break;
    case PlotPanel::InvarianceDepS:
        out = "dep_zs,invariance\n";
        break;
    case PlotPanel::RoptLambda:
        out = "one_minus_lambda,r_opt\n";
        break;
    }
    for (const auto& p : curve.for_split(split))
    {
        switch (panel)
        {
        case PlotPanel::UtilityInvariance:
            out += format_double(p.invariance) + "," + format_double(p.utility);
            break;
        case PlotPanel::DepYDepS:
            out += format_double(p.dep_zs) + "," + format_double(p.dep_zy);
            break;
        case PlotPanel::InvarianceDepS:
            out += format_double(p.dep_zs) + "," + format_double(p.invariance);
            break;
        case PlotPanel::RoptLambda:
            out += format_double(1.0 - p.lambda) + "," + std::to_string(p.r_opt);
            break;
        }
        out += "\n";
    }
    return out;
}

Split default_plot_split(const TradeoffCurve& curve)
{
    if (curve.points.empty())
    {
        throw ValidationError("curve has no points");
    }
    for (const auto& p : curve.points)
    {
        if (p.split == Split::Test)
        {
            return Split::Test;
        }
    }
    return curve.points.front().split;
}

} // namespace ktrade
