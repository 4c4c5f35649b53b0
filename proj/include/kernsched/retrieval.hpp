/*
Copyright 2026 The kernsched Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <span>
#include <vector>

#include "kernsched/kernel.hpp"

namespace kernsched {

struct RetrievedKernel {
    std::size_t index = 0; ///< position in the searched span
    int id = 0;
    double similarity = 0.0;
};

/// The m most similar kernels, by similarity descending then id ascending.
/// Returns every kernel when the library holds fewer than m.
std::vector<RetrievedKernel> retrieve_topm(std::span<const double> query, std::span<const Kernel> library,
                                           std::size_t m);

} // namespace kernsched
