#include "fleximo/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fleximo {

std::size_t thread_count() {
    std::size_t want = 0;
    if (const char* env = std::getenv("FLEXIMO_THREADS")) {
        try {
            const long parsed = std::stol(env);
            if (parsed > 0) want = static_cast<std::size_t>(parsed);
        } catch (const std::exception&) {
            want = 0; // unparsable value falls back to auto
        }
    }
    if (want == 0) want = std::max(1u, std::thread::hardware_concurrency());
    return want;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace fleximo
