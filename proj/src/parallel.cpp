#include "deeprep/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace deeprep {

namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int n) {
    if (n < 1) throw std::invalid_argument("set_max_threads: need at least one thread");
    g_max_threads.store(n);
}

int max_threads() { return g_max_threads.load(); }

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
    const int cap = max_threads();
    if (cap <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(cap, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

}  // namespace deeprep
