// Copyright 2026 The toric-lab Authors
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

#include <cstddef>
#include <functional>

namespace toric {

/// Worker count used by parallel_for; 1 by default. Results never depend on
/// it: work is split into independent index ranges with no shared reduction.
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for i in [0, n), statically partitioned across threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace toric
