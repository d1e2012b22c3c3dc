#ifndef LOCALCLT_PARALLEL_HPP
#define LOCALCLT_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace localclt {

// Runs fn(chunk) for chunk in [0, nchunks) on up to `workers` threads.
// Chunking is fixed by the caller, so putting results into per-chunk slots
// and combining them in chunk order gives output independent of the worker
// count. Exceptions are rethrown on the calling thread.
inline void parallel_chunks(int nchunks, int workers, const std::function<void(int)>& fn) {
    if (nchunks <= 0) return;
    if (workers <= 1 || nchunks == 1) {
        for (int c = 0; c < nchunks; ++c) fn(c);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, nchunks);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int c = next.fetch_add(1);
                if (c >= nchunks || failed.load()) return;
                try {
                    fn(c);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace localclt

#endif
