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

// CSV serialization. Doubles are written in shortest round-trip form, so
// write followed by read reproduces every bit.
//
// Masked format: header `r,t,value,observed`, one line per cell in
// column-major order (0-based indices); missing cells carry `NA`.
// Dense format: one line per row, comma separated, no header.

#ifndef PCNMF_CSV_IO_HPP_
#define PCNMF_CSV_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pcnmf/specmat.hpp"

namespace pcnmf {

std::string format_double(double value);
double parse_double(std::string_view text);

// Split one CSV line on commas (no quoting; none of our fields need it).
std::vector<std::string> split_csv_line(std::string_view line);

void write_masked_csv(std::ostream& out, const MaskedMatrix& s);
MaskedMatrix read_masked_csv(std::istream& in);
void write_masked_csv(const std::filesystem::path& path, const MaskedMatrix& s);
MaskedMatrix read_masked_csv(const std::filesystem::path& path);

void write_dense_csv(std::ostream& out, const Matrix& m);
Matrix read_dense_csv(std::istream& in);
void write_dense_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_dense_csv(const std::filesystem::path& path);

}  // namespace pcnmf

#endif  // PCNMF_CSV_IO_HPP_
