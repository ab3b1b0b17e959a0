#include "msoc/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace msoc {

void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn) {
    if (end <= begin) return;
    int n = end - begin;
    int workers = threads;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
    if (workers > n) workers = n;

    if (workers == 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }

    std::atomic<int> next(begin);
    std::exception_ptr error;
    std::atomic<bool> failed(false);

    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= end || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace msoc
