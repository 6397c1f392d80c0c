// Copyright 2026 The qndmle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <type_traits>
#include <vector>

namespace qndmle {

/// Number of workers to use when the caller asks for 0 ("all cores").
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// out[i] = f(i) for i < count, spread over `workers` threads. Each result
/// lands in its own slot, so the output does not depend on scheduling. If
/// any call throws, the exception of the lowest failing index is rethrown.
template <typename F>
auto parallel_map(std::size_t count, std::size_t workers, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(count);
    std::vector<std::exception_ptr> errors(count);
    const std::size_t w = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (w <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (std::size_t t = 0; t < w; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace qndmle
