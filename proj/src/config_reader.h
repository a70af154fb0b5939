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

#ifndef BIASFORGE_SRC_CONFIG_READER_H_
#define BIASFORGE_SRC_CONFIG_READER_H_

#include <set>
#include <string>

#include "biasforge/dataio.h"
#include "biasforge/errors.h"

namespace biasforge::internal {

// Reads optional members of a JSON config object into typed fields and
// rejects keys nobody asked for. Every failure is a UsageError.
class ConfigReader {
 public:
  ConfigReader(const Json& doc, std::string what) : doc_(doc), what_(std::move(what)) {
    if (!doc_.is_object()) throw UsageError(what_ + ": expected a JSON object");
  }

  bool Has(const char* key) const { return doc_.contains(key); }

  template <typename T>
  void Read(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) Fail(key, "a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) Fail(key, "a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) Fail(key, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) Fail(key, "a string");
    }
    try {
      out = it->get<T>();
    } catch (const Json::exception&) {
      Fail(key, "a value of the expected type");
    }
  }

  const Json* Child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void Finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.contains(key)) throw UsageError(what_ + ": unknown key '" + key + "'");
    }
  }

 private:
  [[noreturn]] void Fail(const char* key, const char* expected) const {
    throw UsageError(what_ + ": '" + key + "' must be " + expected);
  }

  const Json& doc_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace biasforge::internal

#endif  // BIASFORGE_SRC_CONFIG_READER_H_
