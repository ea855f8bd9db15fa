#pragma once

// RFC 4180 CSV: CRLF records, fields quoted when they hold a comma, quote or
// line break, embedded quotes doubled.

#include <string>
#include <string_view>
#include <vector>

#include "circuitlab/core.hpp"
#include "circuitlab/stochastic_engine.hpp"

namespace circuitlab::io {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    if (header.empty()) throw ParameterError("csv: header must not be empty");
    row_strings(header);
  }

  CsvWriter& row_strings(const std::vector<std::string>& fields) {
    if (fields.size() != width_)
      throw ParameterError("csv: row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(width_));
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j) text_ += ',';
      text_ += csv_field(fields[j]);
    }
    text_ += "\r\n";
    return *this;
  }

  CsvWriter& row(const std::vector<double>& values) {
    std::vector<std::string> f;
    f.reserve(values.size());
    for (double v : values) f.push_back(format_number(v));
    return row_strings(f);
  }

  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

/// Long format: t, path, then one column per variable.
inline std::string trajectories_csv(const TrajectorySet& set) {
  std::vector<std::string> header{"t", "path"};
  header.insert(header.end(), set.names.begin(), set.names.end());
  CsvWriter w(header);
  for (std::size_t p = 0; p < set.paths.size(); ++p)
    for (std::size_t k = 0; k < set.rows(p); ++k) {
      std::vector<double> r{set.times[k], static_cast<double>(p)};
      for (std::size_t j = 0; j < set.width(); ++j) r.push_back(set.at(p, k, j));
      w.row(r);
    }
  return w.str();
}

/// Minimal RFC 4180 reader, used to round-trip outputs in tests.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParameterError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace circuitlab::io
