// Copyright 2026 The pcnmf Authors.
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

#include "pcnmf/csv_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "pcnmf/errors.hpp"

namespace pcnmf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

long parse_index(std::string_view text) {
  text = trim(text);
  long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0) {
    throw IoError("bad index field '" + std::string(text) + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw IoError("cannot format double");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("bad numeric field '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  line = trim(line);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void write_masked_csv(std::ostream& out, const MaskedMatrix& s) {
  out << "r,t,value,observed\n";
  for (Index t = 0; t < s.cols(); ++t) {
    for (Index r = 0; r < s.rows(); ++r) {
      out << r << ',' << t << ',';
      if (s.observed(r, t)) {
        out << format_double(s.values()(r, t)) << ",1\n";
      } else {
        out << "NA,0\n";
      }
    }
  }
}

MaskedMatrix read_masked_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "r,t,value,observed") {
    throw IoError("masked CSV must start with header r,t,value,observed");
  }
  struct Cell {
    long r, t;
    double value;
    bool observed;
  };
  std::vector<Cell> cells;
  long rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw IoError("expected 4 fields: " + line);
    Cell c{parse_index(f[0]), parse_index(f[1]), 0.0, false};
    const std::string_view flag = trim(f[3]);
    if (flag == "1") {
      c.observed = true;
      c.value = parse_double(f[2]);
    } else if (flag != "0") {
      throw IoError("observed flag must be 0 or 1: " + line);
    }
    rows = std::max(rows, c.r + 1);
    cols = std::max(cols, c.t + 1);
    cells.push_back(c);
  }
  Matrix values = Matrix::Zero(rows, cols);
  Matrix mask = Matrix::Zero(rows, cols);
  std::vector<bool> seen(static_cast<std::size_t>(rows * cols), false);
  for (const Cell& c : cells) {
    const auto at = static_cast<std::size_t>(c.t * rows + c.r);
    if (seen[at]) {
      throw IoError("duplicate cell (" + std::to_string(c.r) + ", " +
                    std::to_string(c.t) + ")");
    }
    seen[at] = true;
    values(c.r, c.t) = c.value;
    mask(c.r, c.t) = c.observed ? 1.0 : 0.0;
  }
  if (cells.size() != seen.size()) {
    throw IoError("masked CSV does not cover every cell of a " +
                  std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
  return MaskedMatrix(std::move(values), std::move(mask));
}

void write_masked_csv(const std::filesystem::path& path, const MaskedMatrix& s) {
  auto out = open_out(path);
  write_masked_csv(out, s);
}

MaskedMatrix read_masked_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_masked_csv(in);
}

void write_dense_csv(std::ostream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_dense_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& field : split_csv_line(line)) row.push_back(parse_double(field));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged dense CSV");
    }
    rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  const Index m = n == 0 ? 0 : static_cast<Index>(rows.front().size());
  Matrix out(n, m);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < m; ++c) out(r, c) = rows[r][c];
  }
  return out;
}

void write_dense_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_dense_csv(out, m);
}

Matrix read_dense_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dense_csv(in);
}

}  // namespace pcnmf
