// Copyright 2026 The ltm-lab Authors
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

#ifndef LTM_PARALLEL_HPP
#define LTM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ltm {

/// Splits [0, n) into `chunks` fixed ranges and runs fn(chunk, begin, end)
/// on up to `threads` workers. Chunk boundaries do not depend on the worker
/// count, so per-chunk partial results reduced in chunk order are
/// bit-identical for any number of threads.
template <class Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, int threads, Fn &&fn) {
    chunks = std::max<std::size_t>(1, std::min(chunks, n == 0 ? 1 : n));
    auto range = [&](std::size_t c) {
        return std::pair<std::size_t, std::size_t>{n * c / chunks, n * (c + 1) / chunks};
    };
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            auto [b, e] = range(c);
            fn(c, b, e);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, chunks); ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chunks; c = next++) {
                try {
                    auto [b, e] = range(c);
                    fn(c, b, e);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace ltm

#endif
