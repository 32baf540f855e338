#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ckrr/datagen.hpp"

namespace ckrr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& raw, int line_no, int col_no) {
  const std::string s = trim(raw);
  if (s.empty())
    throw CsvParseError("missing value at line " + std::to_string(line_no) +
                        ", column " + std::to_string(col_no));
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw CsvParseError("invalid number '" + s + "' at line " +
                        std::to_string(line_no) + ", column " +
                        std::to_string(col_no));
  return value;
}

}  // namespace

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw CsvParseError("empty CSV file: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2)
    throw CsvParseError("CSV needs at least one feature column and a "
                        "response column: " + path);

  const int n_cols = static_cast<int>(header.size());
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n_cols)
      throw CsvParseError("line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(n_cols));
    std::vector<double> row(n_cols);
    for (int j = 0; j < n_cols; ++j)
      row[j] = parse_number(fields[j], line_no, j + 1);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 10)
    throw InsufficientRows("CSV has " + std::to_string(rows.size()) +
                           " data rows; need at least 10");

  Dataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  for (auto& name : ds.feature_names) name = trim(name);
  ds.response_name = trim(header.back());
  const int n = static_cast<int>(rows.size());
  const int p = n_cols - 1;
  ds.features.resize(n, p);
  ds.response.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) ds.features(i, j) = rows[i][j];
    ds.response(i) = rows[i][p];
  }
  return ds;
}

}  // namespace ckrr
