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

// Config parsing, on-disk formats and the CLI commands end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>

#include "ktrade/io.hpp"
#include "ktrade/pipeline.hpp"
#include "test_util.hpp"

using namespace ktrade;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("ktrade_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string small_config(const fs::path& out)
{
    json j;
    j["dataset"] = {{"toy", {{"n", 600}}}};
    j["seed"] = 5;
    j["kernels"] = {{"x", {{"rff", {{"dim", 30}}}}}};
    j["lambda_grid"] = {{"count", 20}, {"spacing", "linear"}};
    j["output_dir"] = out.string();
    return j.dump();
}

int run_cli(const std::string& args)
{
    const int status = std::system((std::string(KTRADE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("lambda grids")
{
    const auto lin = lambda_grid(5, GridSpacing::Linear, false);
    REQUIRE(lin.size() == 5);
    CHECK(lin.front() == 0.0);
    CHECK(lin.back() == kMaxLambda);
    const auto log = lambda_grid(7, GridSpacing::LogComplement, false);
    CHECK(log.front() == 0.0);
    CHECK(std::abs(log[1] - 0.9) < 1e-15);
    CHECK(log.back() == doctest::Approx(kMaxLambda).epsilon(1e-15));
    const auto def = lambda_grid(70, GridSpacing::Linear, true);
    CHECK(def.size() == 75); // 1 - 1e-6 is already on the linear grid
    CHECK_NOTHROW(validate_lambda_grid(def));
    CHECK_THROWS_AS(lambda_grid(0, GridSpacing::Linear, false), ValidationError);
}

TEST_CASE("config defaults and seed propagation")
{
    const RunConfig cfg = parse_run_config(R"({"dataset": {"toy": {}}, "seed": 11})", "/base");
    REQUIRE(cfg.toy);
    CHECK(cfg.toy->n == 18000);
    CHECK(cfg.toy->seed == 11);
    CHECK(cfg.split.seed == 11);
    CHECK(cfg.kernels.x.rff_seed == 11);
    CHECK(cfg.gammas == std::vector<double>{1e-4});
    CHECK(cfg.lambdas.size() == 75);
    CHECK(cfg.output_dir == "/base/out");

    const RunConfig csv = parse_run_config(
        R"({"dataset": {"csv": "d.csv", "schema": "/abs/s.json"}, "gammas": [1e-3, 1e-2], "lambda_grid": [0, 0.5]})",
        "/base");
    CHECK(csv.csv_path == "/base/d.csv");
    CHECK(csv.schema_path == "/abs/s.json");
    CHECK(csv.gammas.size() == 2);
    CHECK(csv.lambdas == std::vector<double>{0.0, 0.5});
}

TEST_CASE("config errors carry field paths")
{
    const auto message = [](const std::string& text) {
        try
        {
            parse_run_config(text);
        }
        catch (const ValidationError& e)
        {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message(R"({"dataset": {"toy": {}}, "gamma": 0})").rfind("config.gamma:", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {}}, "gama": 1})").rfind("config.gama: unknown", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {"n": "x"}}})").rfind("config.dataset.toy.n:", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {}}, "lambda_grid": [0, 1]})").rfind("config.lambda_grid:", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {}}, "kernels": {"s": {"rff": {"dim": 5}}}})")
              .rfind("config.kernels.s.rff:", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {}}, "kernels": {"x": {"family": "poly"}}})")
              .rfind("config.kernels.x.family:", 0) == 0);
    CHECK(message(R"({"dataset": {}})").rfind("config.dataset:", 0) == 0);
    CHECK(message(R"({"dataset": {"toy": {}}, "split": {"fractions": [0.5, 0.5, 0.5]}})")
              .rfind("config.split.fractions:", 0) == 0);
    CHECK(message("{").rfind("config: invalid JSON", 0) == 0);
}

TEST_CASE("model json round trip is exact")
{
    const Dataset train = ktrade::testing::regression_dataset(50, 1);
    for (const Index rff : {Index{0}, Index{20}})
    {
        KernelConfig cfg;
        cfg.x.rff_dim = rff;
        ModelBundle m;
        m.encoder = fit_encoder(train, cfg, 0.3, 1e-3);
        m.head = train_target_head(encode(m.encoder, train.x), train.y);
        m.preprocess = fit_preprocessor(train, ScalePolicy::MaxDivide);
        m.digest = "abc";
        const ModelBundle back = model_from_json(json::parse(model_to_json(m).dump()));
        CHECK(back.encoder.theta == m.encoder.theta);
        CHECK(back.encoder.eigenvalues == m.encoder.eigenvalues);
        CHECK(back.encoder.r == m.encoder.r);
        CHECK(back.encoder.kernel.path == m.encoder.kernel.path);
        CHECK(back.head.weights == m.head.weights);
        CHECK(back.head.bias == m.head.bias);
        CHECK(back.preprocess.divisors == m.preprocess.divisors);
        CHECK(back.digest == "abc");
        CHECK(encode(back.encoder, train.x) == encode(m.encoder, train.x));
    }
    json bad = json::parse(R"({"format": "something-else"})");
    CHECK_THROWS_AS(model_from_json(bad), ValidationError);
}

TEST_CASE("curve csv round trip and plot panels")
{
    TradeoffCurve c;
    c.points.push_back({0.0, 1e-4, 3, 0.1, 0.2, 0.3, 0.9, 0.5, Split::Train});
    c.points.push_back({0.0, 1e-4, 3, 0.1 / 3, 0.2, 0.3, 0.8, 0.4, Split::Test});
    c.points.push_back({0.5, 1e-4, 1, 0.05, 0.01, 0.02, 0.7, 1.0 / 7, Split::Test});
    const std::string csv = curve_to_csv(c);
    CHECK(csv.rfind("lambda,r_opt,dep_zy,dep_zs,objective,utility,invariance,split\n", 0) == 0);
    const TradeoffCurve back = curve_from_csv(csv);
    REQUIRE(back.points.size() == 3);
    CHECK(back.points[1].dep_zy == 0.1 / 3);
    CHECK(back.points[2].invariance == 1.0 / 7);
    CHECK(back.points[2].split == Split::Test);
    CHECK(curve_to_csv(back) == csv);
    CHECK(curve_from_json(curve_to_json(c)).points.size() == 3);

    CHECK(default_plot_split(c) == Split::Test);
    CHECK(plot_data(c, PlotPanel::RoptLambda, Split::Test) == "one_minus_lambda,r_opt\n1,3\n0.5,1\n");
    CHECK(plot_data(c, PlotPanel::UtilityInvariance, Split::Train) == "invariance,utility\n0.5,0.90000000000000002\n");
    CHECK(plot_panel_from_string("depy-deps") == PlotPanel::DepYDepS);
    CHECK_THROWS_AS(plot_panel_from_string("nope"), ValidationError);
    CHECK_THROWS_AS(curve_from_csv("lambda,r_opt\n"), ValidationError);
}

TEST_CASE("gen-toy writes byte-identical files per seed")
{
    const fs::path dir = scratch("gen");
    const std::string schema = cmd_gen_toy(300, 4, (dir / "a.csv").string());
    cmd_gen_toy(300, 4, (dir / "b.csv").string());
    CHECK(schema == (dir / "a.schema.json").string());
    const std::string a = read_file((dir / "a.csv").string());
    CHECK(a == read_file((dir / "b.csv").string()));
    CHECK(std::count(a.begin(), a.end(), '\n') == 301);
    const Dataset back = load_csv((dir / "a.csv").string(), load_schema(schema));
    CHECK(back.x == gen_gaussian_toy(300, 4).x);
}

TEST_CASE("sweep outputs, determinism and eval consistency")
{
    const fs::path dir = scratch("sweep");
    const RunConfig cfg = parse_run_config(small_config(dir / "run1"));
    const SweepOutputs out = cmd_sweep(cfg);
    CHECK(out.curve.points.size() == 60);
    CHECK(out.digest.size() == 16);
    const TradeoffCurve loaded = load_curve_csv((dir / "run1" / "curve.csv").string());
    CHECK(loaded.for_split(Split::Test).size() == 20);
    CHECK(fs::exists(dir / "run1" / "manifest.json"));
    CHECK(fs::exists(dir / "run1" / "plot" / "ropt-lambda.test.csv"));
    CHECK(fs::exists(dir / "run1" / "models" / "lambda_019.json"));
    const json manifest = json::parse(read_file((dir / "run1" / "manifest.json").string()));
    CHECK(manifest["digest"] == out.digest);
    CHECK(manifest["version"] == kVersion);

    const RunConfig again = parse_run_config(small_config(dir / "run2"));
    const SweepOutputs out2 = cmd_sweep(again);
    CHECK(out2.digest == out.digest);
    CHECK(read_file((dir / "run1" / "curve.csv").string()) == read_file((dir / "run2" / "curve.csv").string()));

    // re-scoring the saved training split reproduces the recorded metrics
    const auto train = out.curve.for_split(Split::Train);
    const std::string data = (dir / "run1" / "data" / "train.csv").string();
    const std::string schema = (dir / "run1" / "data" / "schema.json").string();
    for (const std::size_t i : {std::size_t{0}, std::size_t{10}, std::size_t{19}})
    {
        char name[32];
        std::snprintf(name, sizeof(name), "lambda_%03zu.json", i);
        const json report = cmd_eval((dir / "run1" / "models" / name).string(), data, schema);
        CHECK(report["r"].get<Index>() == train[i].r_opt);
        CHECK(std::abs(report["utility"].get<double>() - train[i].utility) <= 1e-10);
        CHECK(std::abs(report["dep_zs"].get<double>() - train[i].dep_zs) <= 1e-10);
        CHECK(std::abs(report["dep_zy"].get<double>() - train[i].dep_zy) <= 1e-10);
        CHECK(std::abs(report["invariance"].get<double>() - train[i].invariance) <= 1e-10);
        CHECK(report.contains("kcc_zs"));
    }
    // the last grid point has r = 0: majority baseline and no dependence
    const json last = cmd_eval((dir / "run1" / "models" / "lambda_019.json").string(), data, schema);
    CHECK(last["r"] == 0);
    CHECK(last["dep_zs"] == 0.0);

    // a dataset of the wrong width
    const fs::path other = dir / "wide.csv";
    write_file(other.string(), "a,b,y,s\n1,2,0,0.5\n2,3,1,0.1\n3,1,0,0.3\n");
    write_file((dir / "wide.schema.json").string(),
               R"({"a": {"role": "x", "type": "continuous"}, "b": {"role": "x", "type": "continuous"},
                   "y": {"role": "y", "type": "categorical"}, "s": {"role": "s", "type": "continuous"}})");
    try
    {
        cmd_eval((dir / "run1" / "models" / "lambda_000.json").string(), other.string(),
                 (dir / "wide.schema.json").string());
        FAIL("expected a dimension error");
    }
    catch (const ValidationError& e)
    {
        const std::string msg = e.what();
        CHECK(msg.find("2 x columns") != std::string::npos);
        CHECK(msg.find("fitted on 4") != std::string::npos);
    }

    cmd_plot_data((dir / "run1" / "curve.csv").string(), PlotPanel::DepYDepS, (dir / "p.csv").string());
    CHECK(read_file((dir / "p.csv").string()) == read_file((dir / "run1" / "plot" / "depy-deps.test.csv").string()));
}

TEST_CASE("cli exit codes")
{
    const fs::path dir = scratch("cli");
    CHECK(run_cli("gen-toy --n 50 --seed 1 --out " + (dir / "t.csv").string()) == 0);
    CHECK(fs::exists(dir / "t.schema.json"));
    CHECK(run_cli("gen-toy --n 0 --out " + (dir / "z.csv").string()) == 2);
    CHECK(run_cli("gen-toy --bogus") == 2);
    CHECK(run_cli("") == 2);
    write_file((dir / "bad.json").string(), R"({"dataset": {"toy": {}}, "gamma": 0})");
    CHECK(run_cli("sweep --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("sweep --config " + (dir / "missing.json").string()) == 4);
    write_file((dir / "ok.json").string(), small_config(dir / "out"));
    CHECK(run_cli("sweep --config " + (dir / "ok.json").string()) == 0);
    CHECK(run_cli("plot-data --curve " + (dir / "out" / "curve.csv").string() +
                  " --panel utility-invariance --split train --out " + (dir / "ui.csv").string()) == 0);
    CHECK(run_cli("plot-data --curve " + (dir / "out" / "curve.csv").string() + " --panel wrong --out x.csv") == 2);
    CHECK(run_cli("eval --model " + (dir / "out" / "models" / "lambda_000.json").string() + " --data " +
                  (dir / "t.csv").string() + " --schema " + (dir / "t.schema.json").string()) == 0);
    // singular C: exact kernel with a vanishing gamma
    write_file((dir / "sing.json").string(),
               R"({"dataset": {"toy": {"n": 60}}, "gamma": 1e-300, "lambda_grid": [0.5], "output_dir": ")" +
                   (dir / "sing").string() + "\"}");
    CHECK(run_cli("sweep --config " + (dir / "sing.json").string()) == 3);
}
