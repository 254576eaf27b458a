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

#include "ktrade/data.hpp"
#include "ktrade/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace ktrade
{

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out)
    {
        throw IoError("failed writing '" + path + "'");
    }
}

namespace
{

// Splits one CSV record. Handles quoted fields with doubled quotes; quoted
// newlines are not supported.
std::vector<std::string> split_record(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quoted)
        {
            if (c == '"')
            {
                if (i + 1 < line.size() && line[i + 1] == '"')
                {
                    cur.push_back('"');
                    ++i;
                }
                else
                {
                    quoted = false;
                }
            }
            else
            {
                cur.push_back(c);
            }
        }
        else if (c == '"')
        {
            quoted = true;
        }
        else if (c == ',')
        {
            fields.push_back(std::move(cur));
            cur.clear();
        }
        else
        {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string quote_field(const std::string& field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos)
    {
        return field;
    }
    std::string out = "\"";
    for (char c : field)
    {
        if (c == '"')
        {
            out += "\"\"";
        }
        else
        {
            out.push_back(c);
        }
    }
    out += "\"";
    return out;
}

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos)
    {
        return "";
    }
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

const char* role_name(Role role)
{
    switch (role)
    {
    case Role::X:
        return "x";
    case Role::Y:
        return "y";
    case Role::S:
        return "s";
    }
    return "?";
}

// Dictionary encoder honoring a pinned category order, then first appearance.
class CategoryEncoder
{
public:
    explicit CategoryEncoder(const std::vector<std::string>& pinned) : labels_(pinned)
    {
        for (std::size_t i = 0; i < labels_.size(); ++i)
        {
            index_.emplace(labels_[i], static_cast<int>(i));
        }
    }

    int encode(const std::string& value)
    {
        const auto it = index_.find(value);
        if (it != index_.end())
        {
            return it->second;
        }
        const int code = static_cast<int>(labels_.size());
        labels_.push_back(value);
        index_.emplace(value, code);
        return code;
    }

    const std::vector<std::string>& labels() const { return labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

} // namespace

Eigen::VectorXi Attribute::codes() const
{
    if (!categorical)
    {
        throw ValidationError("attribute '" + (names.empty() ? std::string("?") : names.front()) +
                              "' is continuous and has no class codes");
    }
    return values.col(0).cast<int>();
}

MatrixXd Attribute::as_vectors() const
{
    if (!categorical)
    {
        return values;
    }
    MatrixXd onehot = MatrixXd::Zero(values.rows(), num_classes());
    for (Index i = 0; i < values.rows(); ++i)
    {
        onehot(i, static_cast<Index>(values(i, 0))) = 1.0;
    }
    return onehot;
}

void Dataset::validate() const
{
    const Index n = x.rows();
    if (static_cast<Index>(x_columns.size()) != x.cols())
    {
        throw ValidationError("dataset: x has " + std::to_string(x.cols()) + " columns but " +
                              std::to_string(x_columns.size()) + " column descriptors");
    }
    if (y.values.rows() != n || s.values.rows() != n)
    {
        throw ValidationError("dataset: x, y and s row counts differ");
    }
    if (!x.allFinite() || !y.values.allFinite() || !s.values.allFinite())
    {
        throw ValidationError("dataset: non-finite entries");
    }
    const auto check_codes = [](const MatrixXd& col, Index classes, const std::string& what) {
        for (Index i = 0; i < col.rows(); ++i)
        {
            const double v = col(i, 0);
            if (v < 0 || v >= static_cast<double>(classes) || v != std::floor(v))
            {
                throw ValidationError("dataset: " + what + " has category code out of range at row " +
                                      std::to_string(i));
            }
        }
    };
    for (std::size_t c = 0; c < x_columns.size(); ++c)
    {
        if (x_columns[c].type == ColumnType::Categorical)
        {
            check_codes(x.col(static_cast<Index>(c)), static_cast<Index>(x_columns[c].labels.size()),
                        "column '" + x_columns[c].name + "'");
        }
    }
    for (const Attribute* attr : {&y, &s})
    {
        if (attr->categorical)
        {
            if (attr->values.cols() != 1)
            {
                throw ValidationError("dataset: categorical attribute must be a single column");
            }
            check_codes(attr->values, attr->num_classes(), attr == &y ? "y" : "s");
        }
    }
}

Dataset subset(const Dataset& data, const std::vector<Index>& rows)
{
    Dataset out;
    out.x_columns = data.x_columns;
    out.y = data.y;
    out.s = data.s;
    out.x.resize(static_cast<Index>(rows.size()), data.x.cols());
    out.y.values.resize(static_cast<Index>(rows.size()), data.y.values.cols());
    out.s.values.resize(static_cast<Index>(rows.size()), data.s.values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        const Index r = rows[i];
        if (r < 0 || r >= data.size())
        {
            throw ValidationError("subset: row index " + std::to_string(r) + " out of range");
        }
        out.x.row(static_cast<Index>(i)) = data.x.row(r);
        out.y.values.row(static_cast<Index>(i)) = data.y.values.row(r);
        out.s.values.row(static_cast<Index>(i)) = data.s.values.row(r);
    }
    return out;
}

// --- toy ------------------------------------------------------------------

namespace
{

struct ToyDraw
{
    MatrixXd x;
    MatrixXd s;
    Eigen::VectorXi y;
};

// Per sample: 4 draws of U, then 4 draws of N.
ToyDraw draw_toy(Rng& rng, Index n)
{
    constexpr double w = std::numbers::pi / 6.0;
    ToyDraw d{MatrixXd(n, 4), MatrixXd(n, 4), Eigen::VectorXi(n)};
    for (Index i = 0; i < n; ++i)
    {
        double u[4];
        double noise[4];
        for (double& v : u)
        {
            v = rng.normal();
        }
        for (double& v : noise)
        {
            v = rng.normal();
        }
        int code = 0;
        for (int j = 0; j < 4; ++j)
        {
            d.x(i, j) = std::cos(w * u[j]) + kToyNoise * noise[j];
            if (std::abs(u[j]) > kToyThreshold)
            {
                code |= 1 << j;
            }
        }
        d.s(i, 0) = std::sin(w * u[0]);
        d.s(i, 1) = std::sin(w * u[1]);
        d.s(i, 2) = std::cos(w * u[2]);
        d.s(i, 3) = std::cos(w * u[3]);
        d.y(i) = code;
    }
    return d;
}

} // namespace

Dataset gen_gaussian_toy(Index n, std::uint64_t seed)
{
    if (n < 1)
    {
        throw ValidationError("gen_gaussian_toy: n must be at least 1, got " + std::to_string(n));
    }
    Rng rng(seed);
    ToyDraw d = draw_toy(rng, n);
    Dataset data;
    data.x = std::move(d.x);
    for (int j = 1; j <= 4; ++j)
    {
        data.x_columns.push_back({"x" + std::to_string(j), ColumnType::Continuous, {}});
    }
    data.s.values = std::move(d.s);
    data.s.categorical = false;
    data.s.names = {"s1", "s2", "s3", "s4"};
    data.y.values = d.y.cast<double>();
    data.y.categorical = true;
    data.y.names = {"y"};
    for (int c = 0; c < 16; ++c)
    {
        data.y.labels.push_back(std::to_string(c));
    }
    return data;
}

JointSampler toy_sampler()
{
    return [](Rng& rng, Index n) {
        ToyDraw d = draw_toy(rng, n);
        return std::make_pair(std::move(d.x), std::move(d.s));
    };
}

// --- schema ---------------------------------------------------------------

Schema parse_schema_json(const std::string& text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw IoError(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!j.is_object())
    {
        throw ValidationError("schema: top level must be an object of columns");
    }
    Schema schema;
    for (const auto& [name, col] : j.items())
    {
        const std::string where = "schema." + name;
        if (!col.is_object() || !col.contains("role") || !col.contains("type"))
        {
            throw ValidationError(where + ": expected {\"role\": ..., \"type\": ...}");
        }
        ColumnSchema cs;
        const std::string role = col.at("role").get<std::string>();
        if (role == "x")
        {
            cs.role = Role::X;
        }
        else if (role == "y")
        {
            cs.role = Role::Y;
        }
        else if (role == "s")
        {
            cs.role = Role::S;
        }
        else
        {
            throw ValidationError(where + ".role: expected x, y or s, got '" + role + "'");
        }
        const std::string type = col.at("type").get<std::string>();
        if (type == "continuous")
        {
            cs.type = ColumnType::Continuous;
        }
        else if (type == "categorical")
        {
            cs.type = ColumnType::Categorical;
        }
        else
        {
            throw ValidationError(where + ".type: expected continuous or categorical, got '" + type + "'");
        }
        if (col.contains("categories"))
        {
            cs.categories = col.at("categories").get<std::vector<std::string>>();
        }
        schema.emplace(name, std::move(cs));
    }
    return schema;
}

std::string schema_to_json(const Schema& schema)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, cs] : schema)
    {
        nlohmann::json col;
        col["role"] = role_name(cs.role);
        col["type"] = cs.type == ColumnType::Continuous ? "continuous" : "categorical";
        if (!cs.categories.empty())
        {
            col["categories"] = cs.categories;
        }
        j[name] = std::move(col);
    }
    return j.dump(2) + "\n";
}

Schema load_schema(const std::string& path) { return parse_schema_json(read_file(path)); }

void save_schema(const Schema& schema, const std::string& path) { write_file(path, schema_to_json(schema)); }

Schema schema_of(const Dataset& data)
{
    Schema schema;
    for (const auto& col : data.x_columns)
    {
        schema[col.name] = {Role::X, col.type, col.labels};
    }
    for (const auto& [attr, role] : {std::pair{&data.y, Role::Y}, std::pair{&data.s, Role::S}})
    {
        for (const auto& name : attr->names)
        {
            schema[name] = {role, attr->categorical ? ColumnType::Categorical : ColumnType::Continuous,
                            attr->categorical ? attr->labels : std::vector<std::string>{}};
        }
    }
    return schema;
}

// --- CSV ------------------------------------------------------------------

Dataset parse_csv(const std::string& text, const Schema& schema)
{
    std::vector<std::string> lines;
    {
        std::string line;
        std::istringstream in(text);
        while (std::getline(in, line))
        {
            if (!line.empty() && line.back() == '\r')
            {
                line.pop_back();
            }
            if (lines.empty() && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            {
                line.erase(0, 3);
            }
            if (!line.empty())
            {
                lines.push_back(std::move(line));
            }
        }
    }
    if (lines.empty())
    {
        throw ValidationError("csv: empty file (a header row is required)");
    }
    std::vector<std::string> header = split_record(lines.front());
    for (auto& h : header)
    {
        h = trim(h);
    }
    for (const auto& [name, cs] : schema)
    {
        if (std::find(header.begin(), header.end(), name) == header.end())
        {
            throw ValidationError("csv: missing column '" + name + "' declared in schema");
        }
    }
    const Index n = static_cast<Index>(lines.size()) - 1;
    if (n == 0)
    {
        throw ValidationError("csv: no data rows");
    }

    // Column slots in header order, so role blocks keep the file's column order.
    struct Slot
    {
        std::size_t header_index;
        std::string name;
        const ColumnSchema* cs;
        CategoryEncoder encoder;
        std::vector<double> values;
    };
    std::vector<Slot> slots;
    for (std::size_t h = 0; h < header.size(); ++h)
    {
        const auto it = schema.find(header[h]);
        if (it != schema.end())
        {
            slots.push_back({h, header[h], &it->second, CategoryEncoder(it->second.categories), {}});
            slots.back().values.reserve(static_cast<std::size_t>(n));
        }
    }

    for (Index r = 0; r < n; ++r)
    {
        const auto fields = split_record(lines[static_cast<std::size_t>(r + 1)]);
        if (fields.size() != header.size())
        {
            throw ValidationError("csv: row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(header.size()));
        }
        for (auto& slot : slots)
        {
            const std::string cell = trim(fields[slot.header_index]);
            if (slot.cs->type == ColumnType::Categorical)
            {
                slot.values.push_back(static_cast<double>(slot.encoder.encode(cell)));
                continue;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+')
            {
                ++first;
            }
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
            {
                throw ValidationError("csv: cannot parse '" + cell + "' as a number at row " + std::to_string(r + 1) +
                                      ", column '" + slot.name + "'");
            }
            slot.values.push_back(v);
        }
    }

    Dataset data;
    std::vector<const Slot*> xs;
    std::vector<const Slot*> ys;
    std::vector<const Slot*> ss;
    for (const auto& slot : slots)
    {
        (slot.cs->role == Role::X ? xs : slot.cs->role == Role::Y ? ys : ss).push_back(&slot);
    }
    if (ys.empty() || ss.empty())
    {
        throw ValidationError("schema: need at least one y column and one s column");
    }
    if (xs.empty())
    {
        throw ValidationError("schema: need at least one x column");
    }
    data.x.resize(n, static_cast<Index>(xs.size()));
    for (std::size_t c = 0; c < xs.size(); ++c)
    {
        data.x.col(static_cast<Index>(c)) = Eigen::Map<const VectorXd>(xs[c]->values.data(), n);
        XColumn col{xs[c]->name, xs[c]->cs->type, {}};
        if (col.type == ColumnType::Categorical)
        {
            col.labels = xs[c]->encoder.labels();
        }
        data.x_columns.push_back(std::move(col));
    }
    const auto fill_attr = [n](Attribute& attr, const std::vector<const Slot*>& cols, const char* role) {
        const bool categorical = cols.front()->cs->type == ColumnType::Categorical;
        for (const Slot* c : cols)
        {
            if ((c->cs->type == ColumnType::Categorical) != categorical)
            {
                throw ValidationError(std::string("schema: role ") + role + " mixes categorical and continuous columns");
            }
        }
        if (categorical && cols.size() != 1)
        {
            throw ValidationError(std::string("schema: a categorical ") + role + " must be a single column");
        }
        attr.categorical = categorical;
        attr.values.resize(n, static_cast<Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c)
        {
            attr.values.col(static_cast<Index>(c)) = Eigen::Map<const VectorXd>(cols[c]->values.data(), n);
            attr.names.push_back(cols[c]->name);
        }
        if (categorical)
        {
            attr.labels = cols.front()->encoder.labels();
        }
    };
    fill_attr(data.y, ys, "y");
    fill_attr(data.s, ss, "s");
    data.validate();
    return data;
}

Dataset load_csv(const std::string& path, const Schema& schema) { return parse_csv(read_file(path), schema); }

std::string to_csv(const Dataset& data)
{
    std::string out;
    std::vector<std::string> header;
    for (const auto& c : data.x_columns)
    {
        header.push_back(c.name);
    }
    for (const auto& name : data.s.names)
    {
        header.push_back(name);
    }
    for (const auto& name : data.y.names)
    {
        header.push_back(name);
    }
    for (std::size_t i = 0; i < header.size(); ++i)
    {
        out += (i ? "," : "") + quote_field(header[i]);
    }
    out += "\n";
    const auto cell = [](double v, bool categorical, const std::vector<std::string>& labels) {
        return categorical ? quote_field(labels.at(static_cast<std::size_t>(v))) : format_double(v);
    };
    for (Index i = 0; i < data.size(); ++i)
    {
        std::string row;
        for (Index c = 0; c < data.x.cols(); ++c)
        {
            const auto& col = data.x_columns[static_cast<std::size_t>(c)];
            row += (c ? "," : "") + cell(data.x(i, c), col.type == ColumnType::Categorical, col.labels);
        }
        for (Index c = 0; c < data.s.values.cols(); ++c)
        {
            row += "," + cell(data.s.values(i, c), data.s.categorical, data.s.labels);
        }
        for (Index c = 0; c < data.y.values.cols(); ++c)
        {
            row += "," + cell(data.y.values(i, c), data.y.categorical, data.y.labels);
        }
        out += row;
        out += "\n";
    }
    return out;
}

void save_csv(const Dataset& data, const std::string& path) { write_file(path, to_csv(data)); }

// --- preprocessing --------------------------------------------------------

Preprocessor fit_preprocessor(const Dataset& train, ScalePolicy policy)
{
    Preprocessor pre;
    pre.columns = train.x_columns;
    pre.divisors.assign(train.x_columns.size(), 1.0);
    if (policy == ScalePolicy::MaxDivide)
    {
        for (std::size_t c = 0; c < train.x_columns.size(); ++c)
        {
            if (train.x_columns[c].type != ColumnType::Continuous)
            {
                continue;
            }
            const double m = train.size() > 0 ? train.x.col(static_cast<Index>(c)).cwiseAbs().maxCoeff() : 0.0;
            if (m > 0.0)
            {
                pre.divisors[c] = m;
            }
            else
            {
                pre.warnings.push_back("column '" + train.x_columns[c].name + "' has zero maximum; left unscaled");
            }
        }
    }
    return pre;
}

Index Preprocessor::output_dim() const
{
    Index dim = 0;
    for (const auto& col : columns)
    {
        dim += col.type == ColumnType::Categorical ? static_cast<Index>(col.labels.size()) : 1;
    }
    return dim;
}

Dataset Preprocessor::apply(const Dataset& data) const
{
    if (data.x_columns.size() != columns.size())
    {
        throw ValidationError("preprocess: dataset has " + std::to_string(data.x_columns.size()) +
                              " x columns, preprocessor was fitted on " + std::to_string(columns.size()));
    }
    Dataset out;
    out.y = data.y;
    out.s = data.s;
    out.x.resize(data.size(), output_dim());
    Index dst = 0;
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        const Index src = static_cast<Index>(c);
        if (columns[c].type == ColumnType::Continuous)
        {
            out.x.col(dst) = data.x.col(src) / divisors[c];
            out.x_columns.push_back({columns[c].name, ColumnType::Continuous, {}});
            ++dst;
            continue;
        }
        const Index k = static_cast<Index>(columns[c].labels.size());
        out.x.middleCols(dst, k).setZero();
        for (Index i = 0; i < data.size(); ++i)
        {
            const auto code = static_cast<Index>(data.x(i, src));
            if (code < 0 || code >= k)
            {
                throw ValidationError("preprocess: category code out of range in column '" + columns[c].name + "'");
            }
            out.x(i, dst + code) = 1.0;
        }
        for (Index j = 0; j < k; ++j)
        {
            out.x_columns.push_back(
                {columns[c].name + "=" + columns[c].labels[static_cast<std::size_t>(j)], ColumnType::Continuous, {}});
        }
        dst += k;
    }
    return out;
}

// --- splitting ------------------------------------------------------------

void SplitSpec::validate() const
{
    double sum = 0.0;
    for (double f : fractions)
    {
        if (!(f > 0.0))
        {
            throw ValidationError("split: fractions must be positive");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
    {
        throw ValidationError("split: fractions must sum to 1, got " + format_double(sum));
    }
}

std::array<std::vector<Index>, 3> split_indices(Index n, const SplitSpec& spec)
{
    spec.validate();
    if (n < 3)
    {
        throw ValidationError("split: need at least 3 samples, got " + std::to_string(n));
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
    {
        order[static_cast<std::size_t>(i)] = i;
    }
    Rng rng(spec.seed);
    for (Index i = n - 1; i > 0; --i)
    {
        const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    const auto n_train = static_cast<Index>(std::llround(static_cast<double>(n) * spec.fractions[0]));
    const auto n_val = static_cast<Index>(std::llround(static_cast<double>(n) * spec.fractions[1]));
    const Index n_test = n - n_train - n_val;
    if (n_train < 1 || n_val < 1 || n_test < 1)
    {
        throw ValidationError("split: a partition is empty (sizes " + std::to_string(n_train) + ", " +
                              std::to_string(n_val) + ", " + std::to_string(n_test) + ")");
    }
    std::array<std::vector<Index>, 3> parts;
    parts[0].assign(order.begin(), order.begin() + n_train);
    parts[1].assign(order.begin() + n_train, order.begin() + n_train + n_val);
    parts[2].assign(order.begin() + n_train + n_val, order.end());
    return parts;
}

DatasetSplits split(const Dataset& data, const SplitSpec& spec)
{
    DatasetSplits out;
    out.indices = split_indices(data.size(), spec);
    out.train = subset(data, out.indices[0]);
    out.val = subset(data, out.indices[1]);
    out.test = subset(data, out.indices[2]);
    return out;
}

} // namespace ktrade
