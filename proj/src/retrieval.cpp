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

#include "kernsched/retrieval.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace kernsched {

std::vector<RetrievedKernel> retrieve_topm(std::span<const double> query, std::span<const Kernel> library,
                                           std::size_t m) {
    if (m == 0)
        throw UsageError("retrieve_topm needs m >= 1");
    if (library.empty())
        throw UsageError("retrieve_topm needs a non-empty kernel library");

    std::vector<RetrievedKernel> scored;
    scored.reserve(library.size());
    for (std::size_t i = 0; i < library.size(); ++i)
        scored.push_back({i, library[i].id, cosine_sim(query, library[i].signature)});

    const auto better = [](const RetrievedKernel &a, const RetrievedKernel &b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    };
    const std::size_t keep = std::min(m, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
    scored.resize(keep);
    return scored;
}

} // namespace kernsched
