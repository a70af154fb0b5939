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

#ifndef BIASFORGE_ERRORS_H_
#define BIASFORGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace biasforge {

// Base class of every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a format or a type invariant (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller passed an out-of-range argument or an inconsistent option set
// (CLI exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace biasforge

#endif  // BIASFORGE_ERRORS_H_
