#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mgr/dataset.hpp"
#include "mgr/groups.hpp"

namespace mgr {

/// Parses comma-separated text with an optional RFC 4180 quoting subset.
/// Returns one vector of cells per non-empty line.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

struct LoadedData {
  Dataset data;
  GroupClass groups;
};

/// Reads a headed CSV. A column is numeric when every cell parses as a
/// number, categorical otherwise. Labels must be 0 or 1. Group definitions
/// are validated against the resulting schema.
LoadedData load_csv(const std::filesystem::path& path, const std::string& label_column,
                    std::span<const std::string> group_definitions);

/// Reads a CSV with a known schema; unseen categorical tokens become the
/// unseen code. Columns are matched by name.
Dataset load_csv_with_schema(const std::filesystem::path& path,
                             std::shared_ptr<const Schema> schema);

/// Writes rows and labels with the schema's column order and label name
/// last. Numbers use the shortest round-trip form.
void write_csv(const std::filesystem::path& path, const Dataset& data);
std::string to_csv(const Dataset& data);

}  // namespace mgr
