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

#ifndef BIASFORGE_TOOLS_CLI_H_
#define BIASFORGE_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace biasforge::cli {

inline constexpr char kToolVersion[] = "1.0.0";
// Bumped whenever any on-disk format (manifests, embeddings, state files)
// changes incompatibly.
inline constexpr int kFormatVersion = 1;

std::string VersionString();

// `args` excludes the program name. Returns the process exit code:
// 0 success, 1 usage error, 2 data or validation error, 3 internal error.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biasforge::cli

#endif  // BIASFORGE_TOOLS_CLI_H_
