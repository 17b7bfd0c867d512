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

#include "qdea/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "qdea/error.hpp"

namespace qdea {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "binary history dumps assume little-endian hosts");

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

CsvWriter::CsvWriter(const fs::path& path, const std::string& metadata, const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot write " + path.string());
  out_ << "# " << metadata << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (!first_in_row_) out_ << ',';
  out_ << text;
  first_in_row_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_in_row_ = true;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("failed writing " + path_.string());
}

void write_history_csv(const fs::path& path, const HistoryMatrix& history, int node_count, int states_per_node,
                       const std::string& metadata) {
  std::vector<std::string> columns = {"state", "label"};
  for (Eigen::Index l = 0; l < history.samples(); ++l) columns.push_back("t=" + format_double(history.time(l)));
  CsvWriter csv(path, metadata, columns);
  for (Eigen::Index k = 0; k < history.states(); ++k) {
    csv.cell(static_cast<long long>(k));
    csv.cell(node_count > 0 ? state_label(static_cast<StateIndex>(k), node_count, states_per_node)
                            : std::to_string(k));
    for (Eigen::Index l = 0; l < history.samples(); ++l) csv.cell(history.columns(k, l));
    csv.end_row();
  }
  csv.close();
}

void write_history_binary(const fs::path& path, const HistoryMatrix& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(history.columns.data()),
            static_cast<std::streamsize>(history.columns.size() * sizeof(double)));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());

  nlohmann::ordered_json meta;
  meta["format"] = "qdea-history-f64le-colmajor";
  meta["N"] = history.states();
  meta["T"] = history.steps();
  meta["h"] = history.h;
  meta["t_offset"] = history.t_offset;
  meta["model_hash"] = history.model_hash;
  write_json(fs::path(path.string() + ".json"), meta);
}

HistoryMatrix read_history_binary(const fs::path& path) {
  const auto meta = read_json_file(fs::path(path.string() + ".json"));
  HistoryMatrix h;
  const auto n = meta.at("N").get<Eigen::Index>();
  const auto t = meta.at("T").get<Eigen::Index>();
  h.h = meta.at("h").get<double>();
  h.t_offset = meta.at("t_offset").get<double>();
  h.model_hash = meta.at("model_hash").get<std::string>();
  h.columns.resize(n, t + 1);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  in.read(reinterpret_cast<char*>(h.columns.data()), static_cast<std::streamsize>(h.columns.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(h.columns.size() * sizeof(double))) {
    throw IoError("truncated history dump " + path.string());
  }
  return h;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto last_newline = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const auto column = last_newline == std::string::npos ? upto : upto - last_newline - 1;
    throw ValidationError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": malformed JSON document");
  }
}

void require_known_keys(const nlohmann::json& object, const std::vector<std::string>& allowed,
                        const std::string& context) {
  if (!object.is_object()) throw ValidationError(context + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown field '" + key + "' in " + context);
    }
  }
}

}  // namespace qdea
