// SPDX-License-Identifier: Apache-2.0
//
// Index-parallel map with results in index order, so output never depends
// on scheduling.

#ifndef LYACERT_PARALLEL_HPP
#define LYACERT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace lyacert {

/// LYACERT_THREADS if it holds a positive integer, else the hardware count.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("LYACERT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i < n. If several calls throw, the exception of the
/// smallest index is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t n, Fn&& fn, std::size_t workers = worker_count())
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t k = std::min(std::max<std::size_t>(1, workers), n);
    if (k <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < k; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace lyacert

#endif  // LYACERT_PARALLEL_HPP
