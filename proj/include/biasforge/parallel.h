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

#ifndef BIASFORGE_PARALLEL_H_
#define BIASFORGE_PARALLEL_H_

namespace biasforge {

// Sets the worker count used by the distance kernels. Values < 1 reset to the
// runtime default. Results never depend on this setting.
void SetThreadCount(int threads);
int ThreadCount();

}  // namespace biasforge

#endif  // BIASFORGE_PARALLEL_H_
