#include "advreg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace advreg::io {

namespace {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
std::vector<std::vector<std::string>> read_csv_records(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < text.size() && text[k + 1] == '"') {
                    field.push_back('"');
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
            if (field_started || !field.empty() || !record.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            field_started = false;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw ParseError(path.string() + ": unterminated quoted field", records.size() + 1, 0);
    if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t row,
                  std::size_t col)
{
    std::size_t b = 0;
    std::size_t e = cell.size();
    while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
    while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
    double value = 0.0;
    const char* first = cell.data() + b;
    const char* last = cell.data() + e;
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (b == e || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError(path.string() + ": row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": not a finite number: '" + cell + "'",
                         row, col);
    }
    return value;
}

Matrix parse_numeric(const std::filesystem::path& path)
{
    const auto records = read_csv_records(path);
    if (records.empty()) throw ParseError(path.string() + ": missing header row", 1, 0);
    const std::size_t cols = records.front().size();
    const std::size_t rows = records.size() - 1;
    Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& rec = records[r + 1];
        // File row numbers count the header as row 1.
        if (rec.size() != cols) {
            throw ParseError(path.string() + ": row " + std::to_string(r + 2) + " has " +
                                 std::to_string(rec.size()) + " fields, expected " +
                                 std::to_string(cols),
                             r + 2, std::min(rec.size(), cols) + 1);
        }
        for (std::size_t c = 0; c < cols; ++c) {
            M(static_cast<Index>(r), static_cast<Index>(c)) = parse_cell(rec[c], path, r + 2, c + 1);
        }
    }
    return M;
}

}  // namespace

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

Matrix read_matrix_csv(const std::filesystem::path& path)
{
    return parse_numeric(path);
}

Vector read_vector_csv(const std::filesystem::path& path)
{
    Matrix M = parse_numeric(path);
    if (M.cols() != 1) {
        throw ParseError(path.string() + ": expected a single column, found " +
                             std::to_string(M.cols()),
                         1, 2);
    }
    return M.col(0);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& X,
                      const std::string& column_prefix)
{
    std::string out;
    for (Index j = 0; j < X.cols(); ++j) {
        if (j) out += ',';
        out += column_prefix + std::to_string(j + 1);
    }
    out += "\r\n";
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            if (j) out += ',';
            out += format_double(X(i, j));
        }
        out += "\r\n";
    }
    write_text(path, out);
}

void write_vector_csv(const std::filesystem::path& path, const Vector& v,
                      const std::string& column_name)
{
    std::string out = column_name + "\r\n";
    for (Index i = 0; i < v.size(); ++i) out += format_double(v[i]) + "\r\n";
    write_text(path, out);
}

Dataset read_dataset(const std::filesystem::path& x_csv, const std::filesystem::path& y_csv)
{
    Dataset d{read_matrix_csv(x_csv), read_vector_csv(y_csv)};
    d.validate();
    return d;
}

json vector_to_json(const Vector& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

namespace {

json index_set_to_json(const IndexSet& s)
{
    json out = json::array();
    for (Index k : s) out.push_back(k + 1);
    return out;
}

IndexSet index_set_from_json(const json& j)
{
    IndexSet s;
    for (const auto& v : j) {
        const auto k = v.get<long long>();
        if (k < 1) throw InvalidArgument("index sets in files are 1-based; got " + std::to_string(k));
        s.push_back(static_cast<Index>(k - 1));
    }
    return s;
}

}  // namespace

json to_json(const GroundTruth& truth)
{
    return json{{"schema_version", kSchemaVersion},
                {"beta_star", vector_to_json(truth.beta_star)},
                {"support", index_set_to_json(truth.support)},
                {"s", truth.s()},
                {"epsilon", vector_to_json(truth.epsilon)},
                {"sigma", truth.sigma}};
}

GroundTruth truth_from_json(const json& j)
{
    GroundTruth t;
    t.beta_star = vector_from_json(j.at("beta_star"));
    t.support = index_set_from_json(j.at("support"));
    if (j.contains("epsilon") && !j.at("epsilon").is_null()) t.epsilon = vector_from_json(j.at("epsilon"));
    t.sigma = j.at("sigma").get<double>();
    return t;
}

json to_json(const GroupPartition& partition)
{
    json groups = json::array();
    for (const auto& g : partition.groups()) groups.push_back(index_set_to_json(g));
    return json{{"schema_version", kSchemaVersion},
                {"groups", groups},
                {"weights", vector_to_json(partition.weights())}};
}

GroupPartition partition_from_json(const json& j)
{
    std::vector<IndexSet> groups;
    for (const auto& g : j.at("groups")) groups.push_back(index_set_from_json(g));
    Vector w = j.contains("weights") ? vector_from_json(j.at("weights"))
                                     : Vector::Ones(static_cast<Index>(groups.size()));
    return GroupPartition(std::move(groups), std::move(w));
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0, 0);
    }
}

void write_json(const std::filesystem::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace advreg::io
