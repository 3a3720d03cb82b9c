#include "mgr/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mgr/errors.hpp"

namespace mgr {

namespace {

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Label parse_label(const std::string& cell, std::size_t line) {
  const auto v = parse_number(cell);
  if (!v || (*v != 0.0 && *v != 1.0)) {
    throw DataError("non-binary label '" + cell + "' at line " + std::to_string(line));
  }
  return static_cast<Label>(*v);
}

void append_cell(std::string& out, std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) {
    out.append(cell);
    return;
  }
  out.push_back('"');
  for (const char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool row_has_content = false;
  std::size_t i = 0;
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) i = 3;  // UTF-8 BOM
  const auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    if (row_has_content || row.size() > 1 || !row.front().empty()) table.push_back(std::move(row));
    row.clear();
    row_has_content = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        cell.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  if (!cell.empty() || !row.empty()) end_row();
  return table;
}

LoadedData load_csv(const std::filesystem::path& path, const std::string& label_column,
                    std::span<const std::string> group_definitions) {
  const auto table = parse_csv(read_file(path));
  if (table.empty()) throw DataError(path.string() + " is empty");
  const auto& header = table.front();
  if (table.size() < 2) throw DataError(path.string() + " has a header but no rows");

  std::optional<std::size_t> label_at;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) label_at = j;
  }
  if (!label_at) throw SchemaError(path.string() + ": missing label column " + label_column);

  for (std::size_t r = 1; r < table.size(); ++r) {
    if (table[r].size() != header.size()) {
      throw DataError(path.string() + ": line " + std::to_string(r + 1) + " has " +
                      std::to_string(table[r].size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
  }

  std::vector<Column> columns;
  std::vector<std::size_t> source;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == *label_at) continue;
    Column c{header[j], ColumnKind::numeric, {}};
    for (std::size_t r = 1; r < table.size(); ++r) {
      if (!parse_number(table[r][j])) {
        c.kind = ColumnKind::categorical;
        break;
      }
    }
    if (c.kind == ColumnKind::categorical) {
      std::set<std::string> vocab;
      for (std::size_t r = 1; r < table.size(); ++r) vocab.insert(table[r][j]);
      c.vocabulary.assign(vocab.begin(), vocab.end());
    }
    columns.push_back(std::move(c));
    source.push_back(j);
  }
  auto schema = std::make_shared<const Schema>(std::move(columns), label_column);

  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  rows.reserve(table.size() - 1);
  labels.reserve(table.size() - 1);
  for (std::size_t r = 1; r < table.size(); ++r) {
    FeatureRow row;
    row.values.reserve(source.size());
    for (std::size_t k = 0; k < source.size(); ++k) {
      const auto& cell = table[r][source[k]];
      const Column& c = schema->column(k);
      row.values.push_back(c.kind == ColumnKind::numeric ? *parse_number(cell) : c.code_of(cell));
    }
    rows.push_back(std::move(row));
    labels.push_back(parse_label(table[r][*label_at], r + 1));
  }
  Dataset data(schema, std::move(rows), std::move(labels));

  GroupClass groups = GroupClass::parse(group_definitions);
  for (const auto& g : groups) BoundPredicate(g, *schema);  // resolves columns or throws
  return LoadedData{std::move(data), std::move(groups)};
}

Dataset load_csv_with_schema(const std::filesystem::path& path,
                             std::shared_ptr<const Schema> schema) {
  const auto table = parse_csv(read_file(path));
  if (table.empty()) throw DataError(path.string() + " is empty");
  const auto& header = table.front();
  std::vector<std::size_t> source;
  for (const auto& c : schema->columns()) {
    std::optional<std::size_t> at;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == c.name) at = j;
    }
    if (!at) throw SchemaError(path.string() + ": missing column " + c.name);
    source.push_back(*at);
  }
  std::optional<std::size_t> label_at;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == schema->label_name()) label_at = j;
  }
  if (!label_at) throw SchemaError(path.string() + ": missing label column " + schema->label_name());

  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  for (std::size_t r = 1; r < table.size(); ++r) {
    if (table[r].size() != header.size()) {
      throw DataError(path.string() + ": ragged line " + std::to_string(r + 1));
    }
    FeatureRow row;
    for (std::size_t k = 0; k < source.size(); ++k) {
      const auto& cell = table[r][source[k]];
      const Column& c = schema->column(k);
      if (c.kind == ColumnKind::numeric) {
        const auto v = parse_number(cell);
        if (!v) {
          throw DataError(path.string() + ": non-numeric '" + cell + "' in column " + c.name);
        }
        row.values.push_back(*v);
      } else {
        row.values.push_back(c.code_of(cell));
      }
    }
    rows.push_back(std::move(row));
    labels.push_back(parse_label(table[r][*label_at], r + 1));
  }
  return Dataset(std::move(schema), std::move(rows), std::move(labels));
}

std::string to_csv(const Dataset& data) {
  const Schema& schema = data.schema();
  std::string out;
  for (const auto& c : schema.columns()) {
    append_cell(out, c.name);
    out.push_back(',');
  }
  append_cell(out, schema.label_name());
  out.push_back('\n');
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data.row(i);
    for (std::size_t j = 0; j < row.values.size(); ++j) {
      const Column& c = schema.column(j);
      if (c.kind == ColumnKind::categorical) {
        append_cell(out, c.token_of(row.values[j]));
      } else {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row.values[j]);
        out.append(buf, ptr);
      }
      out.push_back(',');
    }
    out.push_back(data.label(i) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(data);
}

}  // namespace mgr
