// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace swirl
{

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be written to
/// caller-owned slots indexed by i, which keeps output order independent of scheduling.
/// The first exception thrown by any call is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    const auto threads = static_cast<std::size_t>(std::clamp<long long>(workers, 1, static_cast<long long>(std::max<std::size_t>(n, 1))));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next {0};
    std::atomic<bool> failed {false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (;;)
        {
            const auto i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace swirl
