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


// ktrade: generate the toy dataset, sweep lambda, evaluate a saved model and
// emit plot data.
//
//   ktrade gen-toy --n 18000 --seed 0 --out toy.csv
//   ktrade sweep --config run.json
//   ktrade eval --model out/models/lambda_000.json --data test.csv --schema schema.json
//   ktrade plot-data --curve out/curve.csv --panel utility-invariance --out ui.csv

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ktrade/pipeline.hpp"

namespace
{

enum ExitCode
{
    kOk = 0,
    kOther = 1,
    kValidation = 2,
    kNumerical = 3,
    kIo = 4,
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Closed-form kernel utility-invariance trade-offs"};
    app.set_version_flag("--version", std::string(ktrade::kVersion));
    app.require_subcommand(1);

    ktrade::Index n = 18000;
    std::uint64_t seed = 0;
    std::string out;
    auto* gen = app.add_subcommand("gen-toy", "Write the Gaussian toy dataset as CSV plus schema");
    gen->add_option("--n", n, "Number of samples")->capture_default_str();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--out", out, "Output CSV path")->required();

    std::string config;
    auto* sw = app.add_subcommand("sweep", "Run a lambda sweep from a JSON config");
    sw->add_option("--config", config, "Config file")->required();

    std::string model, data, schema;
    auto* ev = app.add_subcommand("eval", "Score a dataset with a saved model; prints JSON");
    ev->add_option("--model", model, "Model JSON")->required();
    ev->add_option("--data", data, "Dataset CSV")->required();
    ev->add_option("--schema", schema, "Schema JSON")->required();

    std::string curve, panel, split;
    auto* pd = app.add_subcommand("plot-data", "Write one figure panel of a curve as two-column CSV");
    pd->add_option("--curve", curve, "Curve CSV")->required();
    pd->add_option("--panel", panel, "Panel")
        ->required()
        ->check(CLI::IsMember({"utility-invariance", "depy-deps", "invariance-deps", "ropt-lambda"}));
    pd->add_option("--out", out, "Output CSV path")->required();
    pd->add_option("--split", split, "train | val | test (default: test if present)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try
    {
        if (*gen)
        {
            if (n < 1)
            {
                throw ktrade::ValidationError("--n must be at least 1");
            }
            const std::string schema_path = ktrade::cmd_gen_toy(n, seed, out);
            std::cout << "wrote " << out << " and " << schema_path << "\n";
        }
        else if (*sw)
        {
            const ktrade::RunConfig cfg = ktrade::load_run_config(config);
            const ktrade::SweepOutputs res = ktrade::cmd_sweep(cfg);
            std::cout << "digest " << res.digest << ": " << res.curve.points.size() << " points, " << res.files.size()
                      << " files in " << cfg.output_dir << "\n";
        }
        else if (*ev)
        {
            std::cout << ktrade::cmd_eval(model, data, schema).dump(2) << "\n";
        }
        else if (*pd)
        {
            std::optional<ktrade::Split> s;
            if (!split.empty())
            {
                s = ktrade::split_from_string(split);
            }
            ktrade::cmd_plot_data(curve, ktrade::plot_panel_from_string(panel), out, s);
        }
    }
    catch (const ktrade::ValidationError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    catch (const ktrade::NumericalError& e)
    {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    }
    catch (const ktrade::IoError& e)
    {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOk;
}
