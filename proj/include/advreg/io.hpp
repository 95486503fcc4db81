#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "advreg/model_data.hpp"

namespace advreg::io {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";

// CSV files follow RFC 4180 with a header row and '.' as decimal separator.
// X.csv holds one sample per row (header x1..xp), Y.csv a single column "y".

Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& X,
                      const std::string& column_prefix = "x");
void write_vector_csv(const std::filesystem::path& path, const Vector& v,
                      const std::string& column_name = "y");

Dataset read_dataset(const std::filesystem::path& x_csv, const std::filesystem::path& y_csv);

// Index sets in JSON are 1-based.
json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& j);
json to_json(const GroupPartition& partition);
GroupPartition partition_from_json(const json& j);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest text that parses back to the same double.
std::string format_double(double x);

}  // namespace advreg::io
