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

#include "ktrade/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "ktrade/io.hpp"

namespace ktrade
{

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> lambda_grid(Index count, GridSpacing spacing, bool refine)
{
    if (count < 1)
    {
        throw ValidationError("lambda grid needs at least one point");
    }
    std::vector<double> grid;
    for (Index i = 0; i < count; ++i)
    {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        double l = spacing == GridSpacing::Linear ? kMaxLambda * t : 1.0 - std::pow(10.0, -6.0 * t);
        grid.push_back(std::min(l, kMaxLambda));
    }
    if (refine)
    {
        for (int k = 1; k <= 6; ++k)
        {
            grid.push_back(std::min(1.0 - std::pow(10.0, -k), kMaxLambda));
        }
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    for (const double l : grid)
    {
        if (out.empty() || l - out.back() > 1e-12)
        {
            out.push_back(l);
        }
    }
    return out;
}

// --- config parsing -------------------------------------------------------

namespace
{

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ValidationError(path + ": " + msg); }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
    {
        fail(path, "expected an object");
    }
    for (const auto& item : j.items())
    {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
        {
            fail(path + "." + item.key(), "unknown field");
        }
    }
}

double get_number(const json& j, const std::string& path)
{
    if (!j.is_number())
    {
        fail(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v))
    {
        fail(path, "must be finite");
    }
    return v;
}

std::int64_t get_integer(const json& j, const std::string& path)
{
    if (!j.is_number_integer())
    {
        fail(path, "expected an integer");
    }
    return j.get<std::int64_t>();
}

std::uint64_t get_seed(const json& j, const std::string& path)
{
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    {
        fail(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string())
    {
        fail(path, "expected a string");
    }
    return j.get<std::string>();
}

double positive(double v, const std::string& path)
{
    if (!(v > 0.0))
    {
        fail(path, "must be > 0");
    }
    return v;
}

std::string resolve_path(const std::string& p, const std::string& base_dir)
{
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
}

AttributeKernel parse_attribute_kernel(const json& j, const std::string& path, bool allow_rff, std::uint64_t seed)
{
    check_keys(j, path, {"family", "bandwidth", "rff"});
    AttributeKernel k;
    k.rff_seed = seed;
    if (j.contains("family"))
    {
        try
        {
            k.family = kernel_family_from_string(get_string(j.at("family"), path + ".family"));
        }
        catch (const ValidationError& e)
        {
            if (std::string(e.what()).rfind(path, 0) == 0)
            {
                throw;
            }
            fail(path + ".family", e.what());
        }
    }
    if (j.contains("bandwidth"))
    {
        const json& b = j.at("bandwidth");
        if (b.is_string())
        {
            if (b.get<std::string>() != "median")
            {
                fail(path + ".bandwidth", "expected \"median\" or a positive number");
            }
        }
        else
        {
            k.bandwidth = positive(get_number(b, path + ".bandwidth"), path + ".bandwidth");
        }
    }
    if (j.contains("rff"))
    {
        const json& r = j.at("rff");
        if (!allow_rff)
        {
            fail(path + ".rff", "random features are only supported for x");
        }
        if (r.is_string())
        {
            if (r.get<std::string>() != "off")
            {
                fail(path + ".rff", "expected \"off\" or {dim, seed}");
            }
        }
        else
        {
            check_keys(r, path + ".rff", {"dim", "seed"});
            if (!r.contains("dim"))
            {
                fail(path + ".rff.dim", "required");
            }
            const auto dim = get_integer(r.at("dim"), path + ".rff.dim");
            if (dim < 1)
            {
                fail(path + ".rff.dim", "must be a positive integer");
            }
            k.rff_dim = dim;
            if (r.contains("seed"))
            {
                k.rff_seed = get_seed(r.at("seed"), path + ".rff.seed");
            }
        }
    }
    return k;
}

json attribute_kernel_to_json(const AttributeKernel& k, bool with_rff)
{
    json j;
    j["family"] = k.family ? to_string(*k.family) : "default";
    j["bandwidth"] = k.bandwidth ? json(*k.bandwidth) : json("median");
    if (with_rff)
    {
        j["rff"] = k.rff_dim > 0 ? json{{"dim", k.rff_dim}, {"seed", k.rff_seed}} : json("off");
    }
    return j;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::exception& e)
    {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    const std::string root = "config";
    check_keys(j, root,
               {"dataset", "split", "preprocess", "kernels", "gamma", "gammas", "lambda_grid", "head_ridge",
                "invariance", "kcc", "splits", "seed", "output_dir", "threads", "save_models"});
    RunConfig cfg;
    if (j.contains("seed"))
    {
        cfg.seed = get_seed(j.at("seed"), root + ".seed");
    }

    // dataset
    if (!j.contains("dataset"))
    {
        fail(root + ".dataset", "required");
    }
    {
        const json& d = j.at("dataset");
        const std::string path = root + ".dataset";
        check_keys(d, path, {"toy", "csv", "schema"});
        if (d.contains("toy") == d.contains("csv"))
        {
            fail(path, "give exactly one of \"toy\" or \"csv\"");
        }
        if (d.contains("toy"))
        {
            const json& t = d.at("toy");
            check_keys(t, path + ".toy", {"n", "seed"});
            ToySource toy;
            toy.seed = cfg.seed;
            if (t.contains("n"))
            {
                toy.n = get_integer(t.at("n"), path + ".toy.n");
                if (toy.n < 3)
                {
                    fail(path + ".toy.n", "must be at least 3");
                }
            }
            if (t.contains("seed"))
            {
                toy.seed = get_seed(t.at("seed"), path + ".toy.seed");
            }
            cfg.toy = toy;
        }
        else
        {
            cfg.csv_path = resolve_path(get_string(d.at("csv"), path + ".csv"), base_dir);
            if (!d.contains("schema"))
            {
                fail(path + ".schema", "required with csv");
            }
            cfg.schema_path = resolve_path(get_string(d.at("schema"), path + ".schema"), base_dir);
        }
    }

    // split
    cfg.split.seed = cfg.seed;
    if (j.contains("split"))
    {
        const json& s = j.at("split");
        const std::string path = root + ".split";
        check_keys(s, path, {"fractions", "seed"});
        if (s.contains("fractions"))
        {
            const json& f = s.at("fractions");
            if (!f.is_array() || f.size() != 3)
            {
                fail(path + ".fractions", "expected [train, val, test]");
            }
            for (std::size_t i = 0; i < 3; ++i)
            {
                cfg.split.fractions[i] = get_number(f[i], path + ".fractions[" + std::to_string(i) + "]");
            }
        }
        if (s.contains("seed"))
        {
            cfg.split.seed = get_seed(s.at("seed"), path + ".seed");
        }
        try
        {
            cfg.split.validate();
        }
        catch (const ValidationError& e)
        {
            fail(path + ".fractions", e.what());
        }
    }

    if (j.contains("preprocess"))
    {
        const std::string p = get_string(j.at("preprocess"), root + ".preprocess");
        if (p == "none")
        {
            cfg.preprocess = ScalePolicy::None;
        }
        else if (p == "max-divide")
        {
            cfg.preprocess = ScalePolicy::MaxDivide;
        }
        else
        {
            fail(root + ".preprocess", "expected \"none\" or \"max-divide\"");
        }
    }

    // kernels
    cfg.kernels.x.rff_seed = cfg.seed;
    if (j.contains("kernels"))
    {
        const json& k = j.at("kernels");
        const std::string path = root + ".kernels";
        check_keys(k, path, {"x", "y", "s"});
        if (k.contains("x"))
        {
            cfg.kernels.x = parse_attribute_kernel(k.at("x"), path + ".x", true, cfg.seed);
        }
        if (k.contains("y"))
        {
            cfg.kernels.y = parse_attribute_kernel(k.at("y"), path + ".y", false, cfg.seed);
        }
        if (k.contains("s"))
        {
            cfg.kernels.s = parse_attribute_kernel(k.at("s"), path + ".s", false, cfg.seed);
        }
    }

    // gamma
    if (j.contains("gamma") && j.contains("gammas"))
    {
        fail(root + ".gamma", "give either gamma or gammas, not both");
    }
    if (j.contains("gamma"))
    {
        cfg.gammas = {positive(get_number(j.at("gamma"), root + ".gamma"), root + ".gamma")};
    }
    if (j.contains("gammas"))
    {
        const json& g = j.at("gammas");
        if (!g.is_array() || g.empty())
        {
            fail(root + ".gammas", "expected a non-empty array");
        }
        cfg.gammas.clear();
        for (std::size_t i = 0; i < g.size(); ++i)
        {
            const std::string path = root + ".gammas[" + std::to_string(i) + "]";
            cfg.gammas.push_back(positive(get_number(g[i], path), path));
        }
    }

    // lambda grid
    if (!j.contains("lambda_grid"))
    {
        cfg.lambdas = lambda_grid(70, GridSpacing::Linear, true);
    }
    else
    {
        const json& g = j.at("lambda_grid");
        const std::string path = root + ".lambda_grid";
        if (g.is_array())
        {
            for (std::size_t i = 0; i < g.size(); ++i)
            {
                cfg.lambdas.push_back(get_number(g[i], path + "[" + std::to_string(i) + "]"));
            }
        }
        else
        {
            check_keys(g, path, {"count", "spacing", "refine"});
            Index count = 70;
            GridSpacing spacing = GridSpacing::Linear;
            bool refine = false;
            if (g.contains("count"))
            {
                count = get_integer(g.at("count"), path + ".count");
                if (count < 1)
                {
                    fail(path + ".count", "must be a positive integer");
                }
            }
            if (g.contains("spacing"))
            {
                const std::string s = get_string(g.at("spacing"), path + ".spacing");
                if (s == "log-complement")
                {
                    spacing = GridSpacing::LogComplement;
                }
                else if (s != "linear")
                {
                    fail(path + ".spacing", "expected \"linear\" or \"log-complement\"");
                }
            }
            if (g.contains("refine"))
            {
                if (!g.at("refine").is_boolean())
                {
                    fail(path + ".refine", "expected true or false");
                }
                refine = g.at("refine").get<bool>();
            }
            cfg.lambdas = lambda_grid(count, spacing, refine);
        }
        try
        {
            validate_lambda_grid(cfg.lambdas);
        }
        catch (const ValidationError& e)
        {
            fail(path, e.what());
        }
    }

    if (j.contains("head_ridge"))
    {
        cfg.head_ridge = get_number(j.at("head_ridge"), root + ".head_ridge");
        if (cfg.head_ridge < 0.0)
        {
            fail(root + ".head_ridge", "must be >= 0");
        }
    }
    if (j.contains("invariance"))
    {
        const std::string name = get_string(j.at("invariance"), root + ".invariance");
        try
        {
            cfg.eval.metric = invariance_metric_from_string(name);
        }
        catch (const ValidationError& e)
        {
            fail(root + ".invariance", e.what());
        }
    }
    if (j.contains("kcc"))
    {
        const json& k = j.at("kcc");
        const std::string path = root + ".kcc";
        check_keys(k, path, {"reg", "pivot_tol", "max_rank"});
        if (k.contains("reg"))
        {
            cfg.eval.kcc.reg = positive(get_number(k.at("reg"), path + ".reg"), path + ".reg");
        }
        if (k.contains("pivot_tol"))
        {
            cfg.eval.kcc.pivot_tol = positive(get_number(k.at("pivot_tol"), path + ".pivot_tol"), path + ".pivot_tol");
        }
        if (k.contains("max_rank"))
        {
            cfg.eval.kcc.max_rank = get_integer(k.at("max_rank"), path + ".max_rank");
            if (cfg.eval.kcc.max_rank < 1)
            {
                fail(path + ".max_rank", "must be a positive integer");
            }
        }
    }
    if (j.contains("splits"))
    {
        const json& s = j.at("splits");
        if (!s.is_array() || s.empty())
        {
            fail(root + ".splits", "expected a non-empty array of \"train\", \"val\", \"test\"");
        }
        cfg.splits.clear();
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            const std::string path = root + ".splits[" + std::to_string(i) + "]";
            try
            {
                const Split sp = split_from_string(get_string(s[i], path));
                if (std::find(cfg.splits.begin(), cfg.splits.end(), sp) != cfg.splits.end())
                {
                    fail(path, "duplicate split");
                }
                cfg.splits.push_back(sp);
            }
            catch (const ValidationError& e)
            {
                if (std::string(e.what()).rfind(path, 0) == 0)
                {
                    throw;
                }
                fail(path, e.what());
            }
        }
    }
    if (j.contains("output_dir"))
    {
        cfg.output_dir = get_string(j.at("output_dir"), root + ".output_dir");
    }
    cfg.output_dir = resolve_path(cfg.output_dir, base_dir);
    if (j.contains("threads"))
    {
        const auto t = get_integer(j.at("threads"), root + ".threads");
        if (t < 1 || t > 1024)
        {
            fail(root + ".threads", "must be between 1 and 1024");
        }
        cfg.threads = static_cast<unsigned>(t);
    }
    if (j.contains("save_models"))
    {
        if (!j.at("save_models").is_boolean())
        {
            fail(root + ".save_models", "expected true or false");
        }
        cfg.save_models = j.at("save_models").get<bool>();
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path)
{
    const std::string text = read_file(path);
    const fs::path parent = fs::path(path).parent_path();
    return parse_run_config(text, parent.empty() ? "." : parent.string());
}

json config_to_json(const RunConfig& cfg)
{
    json j;
    if (cfg.toy)
    {
        j["dataset"] = {{"toy", {{"n", cfg.toy->n}, {"seed", cfg.toy->seed}}}};
    }
    else
    {
        j["dataset"] = {{"csv", fs::path(cfg.csv_path).filename().string()},
                        {"schema", fs::path(cfg.schema_path).filename().string()}};
    }
    j["split"] = {{"fractions", cfg.split.fractions}, {"seed", cfg.split.seed}};
    j["preprocess"] = cfg.preprocess == ScalePolicy::MaxDivide ? "max-divide" : "none";
    j["kernels"] = {{"x", attribute_kernel_to_json(cfg.kernels.x, true)},
                    {"y", attribute_kernel_to_json(cfg.kernels.y, false)},
                    {"s", attribute_kernel_to_json(cfg.kernels.s, false)}};
    j["gammas"] = cfg.gammas;
    j["lambda_grid"] = cfg.lambdas;
    j["head_ridge"] = cfg.head_ridge;
    j["invariance"] = to_string(cfg.eval.metric);
    j["kcc"] = {{"reg", cfg.eval.kcc.reg}, {"pivot_tol", cfg.eval.kcc.pivot_tol}, {"max_rank", cfg.eval.kcc.max_rank}};
    json splits = json::array();
    for (const Split s : cfg.splits)
    {
        splits.push_back(to_string(s));
    }
    j["splits"] = splits;
    j["seed"] = cfg.seed;
    return j;
}

std::string config_digest(const RunConfig& cfg, const Dataset& data)
{
    std::uint64_t h = 14695981039346656037ull;
    const auto feed = [&h](const std::string& s) {
        for (const unsigned char c : s)
        {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    feed(config_to_json(cfg).dump());
    feed("\n");
    feed(to_csv(data));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Dataset load_dataset(const RunConfig& cfg)
{
    if (cfg.toy)
    {
        return gen_gaussian_toy(cfg.toy->n, cfg.toy->seed);
    }
    return load_csv(cfg.csv_path, load_schema(cfg.schema_path));
}

// --- commands -------------------------------------------------------------

std::string cmd_gen_toy(Index n, std::uint64_t seed, const std::string& out)
{
    const Dataset data = gen_gaussian_toy(n, seed);
    fs::path schema_path(out);
    schema_path.replace_extension(".schema.json");
    save_csv(data, out);
    save_schema(schema_of(data), schema_path.string());
    return schema_path.string();
}

namespace
{

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void make_dirs(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

} // namespace

SweepOutputs cmd_sweep(const RunConfig& cfg)
{
    const auto t_start = std::chrono::steady_clock::now();
    const Dataset data = load_dataset(cfg);
    SweepOutputs out;
    out.digest = config_digest(cfg, data);
    const DatasetSplits raw = split(data, cfg.split);
    const Preprocessor pre = fit_preprocessor(raw.train, cfg.preprocess);
    DatasetSplits processed;
    processed.train = pre.apply(raw.train);
    processed.val = pre.apply(raw.val);
    processed.test = pre.apply(raw.test);
    processed.indices = raw.indices;
    const double t_load = seconds_since(t_start);

    SweepOptions opts;
    opts.lambdas = cfg.lambdas;
    opts.gammas = cfg.gammas;
    opts.head_ridge = cfg.head_ridge;
    opts.eval = cfg.eval;
    opts.splits = cfg.splits;
    opts.threads = cfg.threads;
    opts.keep_models = cfg.save_models;
    const auto t_sweep0 = std::chrono::steady_clock::now();
    SweepResult result = sweep(processed, cfg.kernels, opts);
    result.curve.digest = out.digest;
    const double t_sweep = seconds_since(t_sweep0);

    const auto t_write0 = std::chrono::steady_clock::now();
    const fs::path root(cfg.output_dir);
    make_dirs(root / "plot");
    make_dirs(root / "data");
    const auto emit = [&](const fs::path& rel, const std::string& text) {
        write_file((root / rel).string(), text);
        out.files.push_back(rel.generic_string());
    };
    emit("curve.csv", curve_to_csv(result.curve));
    emit("curve.json", curve_to_json(result.curve).dump(1) + "\n");
    for (const Split s : cfg.splits)
    {
        for (const PlotPanel p : all_plot_panels())
        {
            emit(fs::path("plot") / (to_string(p) + "." + to_string(s) + ".csv"), plot_data(result.curve, p, s));
        }
    }
    emit(fs::path("data") / "train.csv", to_csv(raw.train));
    emit(fs::path("data") / "val.csv", to_csv(raw.val));
    emit(fs::path("data") / "test.csv", to_csv(raw.test));
    emit(fs::path("data") / "schema.json", schema_to_json(schema_of(data)));
    json models = json::array();
    if (cfg.save_models)
    {
        make_dirs(root / "models");
        for (std::size_t i = 0; i < result.models.size(); ++i)
        {
            ModelBundle bundle{result.models[i], result.heads[i], pre, cfg.eval, out.digest};
            char name[32];
            std::snprintf(name, sizeof(name), "lambda_%03zu.json", i);
            emit(fs::path("models") / name, model_to_json(bundle).dump(1) + "\n");
            models.push_back({{"lambda", result.models[i].lambda}, {"file", (fs::path("models") / name).generic_string()}});
        }
    }
    out.curve = std::move(result.curve);

    json manifest;
    manifest["format"] = "ktrade-manifest";
    manifest["version"] = kVersion;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["digest"] = out.digest;
    manifest["config"] = config_to_json(cfg);
    manifest["threads"] = cfg.threads;
    manifest["samples"] = {{"train", raw.train.size()}, {"val", raw.val.size()}, {"test", raw.test.size()}};
    manifest["preprocess_warnings"] = pre.warnings;
    manifest["models"] = models;
    manifest["files"] = out.files;
    manifest["wall_seconds"] = {
        {"load", t_load}, {"sweep", t_sweep}, {"write", seconds_since(t_write0)}, {"total", seconds_since(t_start)}};
    write_file((root / "manifest.json").string(), manifest.dump(1) + "\n");
    out.files.push_back("manifest.json");
    return out;
}

json cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& schema_path)
{
    const ModelBundle model = load_model(model_path);
    const Dataset raw = load_csv(data_path, load_schema(schema_path));
    const Dataset data = model.preprocess.apply(raw);
    if (data.x.cols() != model.encoder.kernel.input_dim())
    {
        throw ValidationError("data has dimension " + std::to_string(data.x.cols()) +
                              " but the model expects dimension " + std::to_string(model.encoder.kernel.input_dim()));
    }
    if (model.head.task == Task::Classification && data.y.labels != model.head.labels)
    {
        throw ValidationError("target categories in the data differ from the model's");
    }
    const InvarianceMetric metric = resolve_metric(model.eval.metric, data.y, data.s);
    EvaluateOptions opts = model.eval;
    opts.metric = metric;
    const TradeoffPoint p = evaluate(model.encoder, model.head, data, Split::Test, opts);
    json report{{"n", data.size()},
                {"lambda", p.lambda},
                {"gamma", p.gamma},
                {"r", p.r_opt},
                {"objective", p.objective},
                {"dep_zy", p.dep_zy},
                {"dep_zs", p.dep_zs},
                {"utility", p.utility},
                {"utility_metric", model.head.task == Task::Classification ? "accuracy" : "negative_mse"},
                {"invariance", p.invariance},
                {"invariance_metric", to_string(metric)}};
    report[metric == InvarianceMetric::Dpv ? "dpv" : "kcc_zs"] = p.invariance;
    return report;
}

void cmd_plot_data(const std::string& curve_path, PlotPanel panel, const std::string& out, std::optional<Split> split)
{
    const TradeoffCurve curve = load_curve_csv(curve_path);
    write_file(out, plot_data(curve, panel, split ? *split : default_plot_split(curve)));
}

} // namespace ktrade
