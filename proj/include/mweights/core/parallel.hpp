#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mweights {

namespace detail {
inline std::atomic<int>& thread_cap_override()
{
    static std::atomic<int> cap{0};
    return cap;
}
} // namespace detail

/// Overrides MWEIGHTS_THREADS for the current process; 0 restores the default.
inline void set_thread_cap(int threads) { detail::thread_cap_override().store(std::max(0, threads)); }

/// Worker count: explicit override, else MWEIGHTS_THREADS, else hardware concurrency.
inline int thread_count()
{
    if (int cap = detail::thread_cap_override().load(); cap > 0)
        return cap;
    if (const char* env = std::getenv("MWEIGHTS_THREADS"); env != nullptr) {
        try {
            int v = std::stoi(env);
            if (v > 0)
                return v;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over fixed chunks of [0, count). Chunk boundaries do not
/// depend on the thread count, so any per-index output is schedule independent.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t grain = 512)
{
    if (count == 0)
        return;
    grain = std::max<std::size_t>(1, grain);
    const std::size_t chunks = (count + grain - 1) / grain;
    const int workers = static_cast<int>(std::min<std::size_t>(chunks, static_cast<std::size_t>(thread_count())));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            fn(c * grain, std::min(count, (c + 1) * grain));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto body = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks)
                return;
            try {
                fn(c * grain, std::min(count, (c + 1) * grain));
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure)
                    failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int t = 1; t < workers; ++t)
        pool.emplace_back(body);
    body();
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

/// Sum of term(i) over [0, count) with a fixed reduction tree: partial sums per
/// fixed-size chunk, then the partials in chunk order.
template <class Fn>
double deterministic_sum(std::size_t count, Fn&& term, std::size_t chunk = 4096)
{
    if (count == 0)
        return 0.0;
    const std::size_t chunks = (count + chunk - 1) / chunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_for(
        chunks,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t c = b; c < e; ++c) {
                double s = 0.0;
                const std::size_t hi = std::min(count, (c + 1) * chunk);
                for (std::size_t i = c * chunk; i < hi; ++i)
                    s += term(i);
                partial[c] = s;
            }
        },
        1);
    double total = 0.0;
    for (double s : partial)
        total += s;
    return total;
}

} // namespace mweights
