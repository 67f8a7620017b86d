#include "contatt/pipeline/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "contatt/errors.hpp"

namespace contatt::pipeline {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_number(const std::string& field, int line_no) {
  std::size_t begin = field.find_first_not_of(" \t\r");
  std::size_t end = field.find_last_not_of(" \t\r");
  if (begin == std::string::npos) {
    throw ArgumentError("empty field on CSV line " + std::to_string(line_no));
  }
  double value = 0.0;
  const char* first = field.data() + begin;
  const char* last = field.data() + end + 1;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ArgumentError("bad number '" + field + "' on CSV line " + std::to_string(line_no));
  }
  return value;
}

// Parses a numeric CSV with a header row into rows of equal width.
std::vector<std::vector<double>> parse_numeric_csv(const std::string& text, std::size_t& columns) {
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  columns = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split_fields(line);
    if (columns == 0) {
      columns = fields.size();
      continue;
    }
    if (fields.size() != columns) {
      throw ArgumentError("CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                          " fields, expected " + std::to_string(columns));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto& f : fields) {
      row.push_back(parse_number(f, line_no));
    }
    rows.push_back(std::move(row));
  }
  if (columns == 0) {
    throw ArgumentError("CSV input is empty");
  }
  return rows;
}

} // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

std::string series_to_csv(const TimeSeries& series) {
  std::string out = "time";
  for (int o = 0; o < series.dims(); ++o) {
    out += ",dim_" + std::to_string(o);
  }
  out += '\n';
  for (int l = 0; l < series.length(); ++l) {
    out += format_double(series.times[l]);
    for (int o = 0; o < series.dims(); ++o) {
      out += ',';
      out += format_double(series.values(o, l));
    }
    out += '\n';
  }
  return out;
}

TimeSeries series_from_csv(const std::string& text) {
  std::size_t columns = 0;
  auto rows = parse_numeric_csv(text, columns);
  if (columns < 2) {
    throw ArgumentError("series CSV needs a time column and at least one value column");
  }
  TimeSeries s;
  s.values.resize(static_cast<Eigen::Index>(columns - 1), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t l = 0; l < rows.size(); ++l) {
    s.times.push_back(rows[l][0]);
    for (std::size_t o = 1; o < columns; ++o) {
      s.values(static_cast<Eigen::Index>(o - 1), static_cast<Eigen::Index>(l)) = rows[l][o];
    }
  }
  s.validate();
  return s;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

void write_series_csv(const std::string& path, const TimeSeries& series) {
  write_text_file(path, series_to_csv(series));
}

TimeSeries read_series_csv(const std::string& path) { return series_from_csv(read_text_file(path)); }

DiscreteAttention read_weights_csv(const std::string& path) {
  std::size_t columns = 0;
  auto rows = parse_numeric_csv(read_text_file(path), columns);
  if (columns != 2) {
    throw ArgumentError("weights CSV must have exactly two columns t,w");
  }
  std::vector<double> locations;
  std::vector<double> scores;
  for (const auto& r : rows) {
    locations.push_back(r[0]);
    scores.push_back(r[1]);
  }
  return DiscreteAttention::from_scores(std::move(locations), scores);
}

} // namespace contatt::pipeline
