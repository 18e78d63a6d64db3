#include "permadyn/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace permadyn {

namespace {
std::atomic<unsigned> g_default_threads{0};
}

void set_default_threads(unsigned n) { g_default_threads.store(n); }

unsigned default_threads() {
    unsigned n = g_default_threads.load();
    if (n == 0) n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned n_threads) {
    if (n == 0) return;
    if (n_threads == 0) n_threads = default_threads();
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace permadyn
