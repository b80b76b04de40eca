#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lanczos_lab::harness {

/** Worker count: the request (0 = hardware), capped by LANCZOS_LAB_THREADS and by the task count. */
inline unsigned resolve_threads(unsigned requested, std::size_t tasks)
{
    unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LANCZOS_LAB_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) t = std::min<unsigned>(t, static_cast<unsigned>(cap));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, tasks)));
}

/** Runs fn(i) for i in [0, tasks) on `threads` workers. The first exception is rethrown. */
inline void parallel_for(std::size_t tasks, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace lanczos_lab::harness
