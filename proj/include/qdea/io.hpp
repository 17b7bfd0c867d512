// Copyright 2026 The qdea Authors
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

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qdea/lde.hpp"

namespace qdea {

/// 17 significant digits, shortest exponent form; round-trips exactly.
std::string format_double(double value);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Line-oriented CSV. The first line is a '#' metadata comment, the second
/// the column header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& metadata,
            const std::vector<std::string>& columns);

  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  void end_row();
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  bool first_in_row_ = true;
};

/// Rows are states (index and q-ary label), columns are timestamps.
void write_history_csv(const std::filesystem::path& path, const HistoryMatrix& history, int node_count,
                       int states_per_node, const std::string& metadata);

/// Raw little-endian float64 column-major dump plus `<path>.json` sidecar
/// {format, N, T, h, t_offset, model_hash}.
void write_history_binary(const std::filesystem::path& path, const HistoryMatrix& history);
HistoryMatrix read_history_binary(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

/// Parses a JSON file; syntax errors become ValidationError with line and
/// column.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Throws ValidationError naming the first key of `object` not in `allowed`.
void require_known_keys(const nlohmann::json& object, const std::vector<std::string>& allowed,
                        const std::string& context);

}  // namespace qdea
