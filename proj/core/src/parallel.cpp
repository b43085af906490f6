#include "vortexlab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vlab {

int worker_count() {
    if (const char* env = std::getenv("VORTEX_THREADS")) {
        try {
            int want = std::stoi(env);
            if (want >= 1) return std::min(want, 256);
        } catch (...) {
            // unparsable: fall through to the hardware count
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (n <= 0) return;
    int workers = worker_count();
    // Small batches are not worth the thread spawn.
    if (workers == 1 || n < 256) {
        body(0, n);
        return;
    }
    std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        std::int64_t b = w * chunk;
        std::int64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

} // namespace vlab
