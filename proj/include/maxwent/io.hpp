/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_IO_HPP_
#define MAXWENT_IO_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "maxwent/common.hpp"

namespace maxwent {

/// Write-through-temp-then-rename so interrupted runs never leave truncated
/// files behind.
inline void atomic_write_text(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path() && !target.parent_path().empty() &&
      !std::filesystem::exists(target.parent_path()))
    throw IoError("atomic_write_text: directory '" + target.parent_path().string() +
                  "' does not exist");
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("atomic_write_text: cannot open '" + tmp.string() + "'");
    out << content;
    if (!out) throw IoError("atomic_write_text: write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("atomic_write_text: rename to '" + path + "' failed: " + ec.message());
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_text: cannot open '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace maxwent

#endif  // MAXWENT_IO_HPP_
