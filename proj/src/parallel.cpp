#include "lqrvol/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lqrvol
{
unsigned resolve_thread_count(unsigned requested)
{
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(Index n, unsigned threads, const std::function<void(Index)>& body)
{
    if (n <= 0) return;
    const unsigned workers = std::min<unsigned>(resolve_thread_count(threads), static_cast<unsigned>(n));

    std::mutex error_mutex;
    Index error_index = n;
    std::exception_ptr error;
    auto run = [&](Index i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (i < error_index) {
                error_index = i;
                error = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        for (Index i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<Index> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (Index i = next++; i < n; i = next++) run(i);
            });
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace lqrvol
