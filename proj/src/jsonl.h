// Copyright 2026 The Biasforge Authors.
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

#ifndef BIASFORGE_SRC_JSONL_H_
#define BIASFORGE_SRC_JSONL_H_

#include <string>
#include <string_view>

#include "biasforge/dataio.h"
#include "biasforge/errors.h"

namespace biasforge::internal {

// Calls fn(record, line_number) for each non-blank line. Line numbers are
// 1-based. Parse failures raise DataError naming the line.
template <typename Fn>
void ForEachJsonLine(std::string_view text, std::string_view what, Fn&& fn) {
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError(std::string(what) + ": malformed JSON at line " +
                      std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw DataError(std::string(what) + ": line " + std::to_string(line_no) +
                      " is not a JSON object");
    }
    fn(record, line_no);
  }
}

[[noreturn]] inline void LineError(std::string_view what, size_t line_no,
                                   std::string_view message) {
  throw DataError(std::string(what) + ": line " + std::to_string(line_no) +
                  ": " + std::string(message));
}

// Required string member.
inline const std::string& StringMember(const Json& record, const char* key,
                                       std::string_view what, size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    LineError(what, line_no, std::string("missing string field '") + key + "'");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace biasforge::internal

#endif  // BIASFORGE_SRC_JSONL_H_
