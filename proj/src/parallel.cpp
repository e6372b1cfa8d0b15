#include "lpdsvm/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lpdsvm {

int hardware_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::size_t num_tasks, int num_threads,
                  const std::function<void(std::size_t)>& fn) {
    if (num_tasks == 0) return;
    std::size_t workers = num_threads < 1 ? 1 : static_cast<std::size_t>(num_threads);
    if (workers > num_tasks) workers = num_tasks;

    if (workers == 1) {
        for (std::size_t t = 0; t < num_tasks; ++t) fn(t);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
            if (t >= num_tasks) return;
            try {
                fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();

    if (error) std::rethrow_exception(error);
}

}  // namespace lpdsvm
