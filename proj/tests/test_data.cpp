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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "ktrade/data.hpp"
#include "test_util.hpp"

using namespace ktrade;

namespace
{

Schema small_schema()
{
    Schema s;
    s["a"] = {Role::X, ColumnType::Continuous, {}};
    s["c"] = {Role::X, ColumnType::Categorical, {}};
    s["label"] = {Role::Y, ColumnType::Categorical, {}};
    s["group"] = {Role::S, ColumnType::Continuous, {}};
    return s;
}

} // namespace

TEST_CASE("toy bit marginals are balanced")
{
    const Dataset d = gen_gaussian_toy(18000, 0);
    CHECK(d.size() == 18000);
    CHECK(d.x.cols() == 4);
    CHECK(d.s.values.cols() == 4);
    CHECK(d.y.num_classes() == 16);
    const Eigen::VectorXi y = d.y.codes();
    for (int bit = 0; bit < 4; ++bit)
    {
        double ones = 0.0;
        for (Index i = 0; i < y.size(); ++i)
        {
            ones += (y(i) >> bit) & 1;
        }
        CHECK(std::abs(ones / 18000.0 - 0.5) <= 0.02);
    }
    CHECK(d.x.cwiseAbs().maxCoeff() <= 1.05);
}

TEST_CASE("toy statistics")
{
    const Dataset d = gen_gaussian_toy(18000, 1);
    // E[cos(pi U / 6)] = exp(-(pi/6)^2 / 2) for U ~ N(0, 1).
    const double a = std::numbers::pi / 6.0;
    const double mean = std::exp(-a * a / 2.0);
    const double var = 0.5 * (1.0 + std::exp(-2.0 * a * a)) - mean * mean + 0.005 * 0.005;
    for (Index j = 0; j < 4; ++j)
    {
        CHECK(std::abs(d.x.col(j).mean() - mean) <= 3.0 * std::sqrt(var / 18000.0));
    }
    // chi-square goodness of fit over the 16 classes; 30.58 is the 0.99
    // quantile with 15 degrees of freedom
    std::array<double, 16> counts{};
    const Eigen::VectorXi y = d.y.codes();
    for (Index i = 0; i < y.size(); ++i)
    {
        counts[static_cast<std::size_t>(y(i))] += 1.0;
    }
    double chi2 = 0.0;
    for (const double c : counts)
    {
        chi2 += (c - 18000.0 / 16.0) * (c - 18000.0 / 16.0) / (18000.0 / 16.0);
    }
    CHECK(chi2 <= 30.58);
}

TEST_CASE("toy is deterministic per seed")
{
    const Dataset a = gen_gaussian_toy(500, 9);
    const Dataset b = gen_gaussian_toy(500, 9);
    const Dataset c = gen_gaussian_toy(500, 10);
    CHECK(a.x == b.x);
    CHECK(a.s.values == b.s.values);
    CHECK(a.y.values == b.y.values);
    CHECK(a.x != c.x);
    CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("csv load with a schema")
{
    const std::string text = "a,c,label,group\n1.5,red,yes,0.25\n-2,blue,no,1\n3e-1,red,no,-0.5\n";
    const Dataset d = parse_csv(text, small_schema());
    CHECK(d.size() == 3);
    CHECK(d.x.cols() == 2);
    CHECK(d.x(0, 0) == 1.5);
    CHECK(d.x(2, 0) == 0.3);
    CHECK(d.x_columns[1].type == ColumnType::Categorical);
    CHECK(d.x_columns[1].labels == std::vector<std::string>{"red", "blue"});
    CHECK(d.x(1, 1) == 1.0);
    CHECK(d.y.categorical);
    CHECK(d.y.labels == std::vector<std::string>{"yes", "no"});
    CHECK(d.s.values(2, 0) == -0.5);
}

TEST_CASE("csv errors")
{
    try
    {
        parse_csv("a,c,label,group\n1,red,yes,0\n1,red,no,oops\n", small_schema());
        FAIL("expected a parse error");
    }
    catch (const ValidationError& e)
    {
        const std::string msg = e.what();
        CHECK(msg.find("group") != std::string::npos);
        CHECK(msg.find("row 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv("a,c,label\n1,red,yes\n", small_schema()), ValidationError);
    CHECK_THROWS_AS(parse_csv("", small_schema()), ValidationError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", small_schema()), IoError);
}

TEST_CASE("csv round trip")
{
    const Dataset d = gen_gaussian_toy(200, 3);
    const Schema schema = schema_of(d);
    const Dataset back = parse_csv(to_csv(d), schema);
    CHECK(back.x == d.x);
    CHECK(back.s.values == d.s.values);
    CHECK(back.y.values == d.y.values);
    CHECK(back.y.labels == d.y.labels);
    CHECK(parse_schema_json(schema_to_json(schema)).size() == schema.size());
}

TEST_CASE("max-divide preprocessing")
{
    Schema schema;
    schema["a"] = {Role::X, ColumnType::Continuous, {}};
    schema["y"] = {Role::Y, ColumnType::Continuous, {}};
    schema["s"] = {Role::S, ColumnType::Continuous, {}};
    const Dataset train = parse_csv("a,y,s\n2,0,0\n4,1,1\n", schema);
    const Dataset test = parse_csv("a,y,s\n6,0,0\n-1,1,1\n", schema);
    const Preprocessor p = fit_preprocessor(train, ScalePolicy::MaxDivide);
    const Dataset t = p.apply(train);
    CHECK(t.x(0, 0) == 0.5);
    CHECK(t.x(1, 0) == 1.0);
    const Dataset u = p.apply(test);
    CHECK(u.x(0, 0) == 1.5);
    CHECK(u.x(1, 0) == -0.25);
    CHECK(t.y.values == train.y.values);

    const Preprocessor none = fit_preprocessor(train, ScalePolicy::None);
    CHECK(none.apply(test).x == test.x);

    const Dataset zero = parse_csv("a,y,s\n0,0,0\n0,1,1\n", schema);
    const Preprocessor z = fit_preprocessor(zero, ScalePolicy::MaxDivide);
    CHECK(z.warnings.size() == 1);
    CHECK(z.apply(zero).x == zero.x);
}

TEST_CASE("categorical x columns are one-hot encoded")
{
    const Dataset d = parse_csv("a,c,label,group\n1,red,yes,0\n2,blue,no,1\n3,green,no,0\n", small_schema());
    const Preprocessor p = fit_preprocessor(d, ScalePolicy::None);
    const Dataset t = p.apply(d);
    CHECK(p.output_dim() == 4);
    CHECK(t.x.cols() == 4);
    CHECK(t.x.rightCols(3).rowwise().sum() == Eigen::VectorXd::Ones(3));
}

TEST_CASE("split sizes, determinism and coverage")
{
    SplitSpec spec;
    spec.fractions = {0.8, 0.1, 0.1};
    spec.seed = 4;
    const auto idx = split_indices(10, spec);
    CHECK(idx[0].size() == 8);
    CHECK(idx[1].size() == 1);
    CHECK(idx[2].size() == 1);
    CHECK(split_indices(10, spec) == idx);

    for (const Index n : {3, 7, 100, 1001})
    {
        SplitSpec thirds;
        thirds.seed = static_cast<std::uint64_t>(n);
        const auto parts = split_indices(n, thirds);
        std::set<Index> seen;
        std::size_t total = 0;
        for (const auto& part : parts)
        {
            CHECK(!part.empty());
            seen.insert(part.begin(), part.end());
            total += part.size();
        }
        CHECK(total == static_cast<std::size_t>(n));
        CHECK(seen.size() == static_cast<std::size_t>(n));
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n - 1);
    }
    CHECK_THROWS_AS(split_indices(2, SplitSpec{}), ValidationError);
    SplitSpec bad;
    bad.fractions = {0.5, 0.3, 0.3};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    SplitSpec empty_part;
    empty_part.fractions = {0.98, 0.01, 0.01};
    CHECK_THROWS_AS(split_indices(10, empty_part), ValidationError);
}
