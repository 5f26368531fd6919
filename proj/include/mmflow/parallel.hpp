#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mmflow {

// Execution backend for the heavy kernels. `serial` is the reference path
// (plain in-order loops); `parallel` uses OpenMP with a fixed chunked
// reduction tree so results are bitwise reproducible for a fixed worker count.
enum class Backend { serial, parallel };

// Worker count: min(MMFLOW_THREADS, hardware threads), at least 1. Cached.
inline int worker_count() {
    static const int cached = [] {
        int hw = 1;
#if defined(_OPENMP)
        hw = omp_get_max_threads();
#endif
        if (const char* env = std::getenv("MMFLOW_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1 && v < 4096) hw = (hw < (int)v) ? hw : (int)v;
        }
        return hw < 1 ? 1 : hw;
    }();
    return cached;
}

namespace detail {

// Contiguous chunk [begin, end) for chunk c of `chunks` over n items.
inline void chunk_range(long long n, int chunks, int c, long long& begin, long long& end) {
    long long q = n / chunks, r = n % chunks;
    begin = c * q + (c < r ? c : r);
    end = begin + q + (c < r ? 1 : 0);
}

}  // namespace detail

// Sum of term(i) for i in [0, n). The parallel path partitions the range into
// worker_count() chunks, sums each chunk in index order, then adds the chunk
// partials in chunk order: the result depends only on (n, worker count), never
// on thread scheduling.
template <class F>
double parallel_sum(long long n, Backend backend, F&& term) {
    if (n <= 0) return 0.0;
    const int workers = worker_count();
    if (backend == Backend::serial) {
        double acc = 0.0;
        for (long long i = 0; i < n; ++i) acc += term(i);
        return acc;
    }
    const int chunks = workers;
    std::vector<double> partial(chunks, 0.0);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
    for (int c = 0; c < chunks; ++c) {
        long long b, e;
        detail::chunk_range(n, chunks, c, b, e);
        double acc = 0.0;
        for (long long i = b; i < e; ++i) acc += term(i);
        partial[c] = acc;
    }
    double total = 0.0;
    for (int c = 0; c < chunks; ++c) total += partial[c];
    return total;
}

// body(i) for i in [0, n); iterations must write disjoint state.
template <class F>
void parallel_for(long long n, Backend backend, F&& body) {
    if (n <= 0) return;
    if (backend == Backend::serial) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(worker_count())
#endif
    for (long long i = 0; i < n; ++i) body(i);
}

}  // namespace mmflow
