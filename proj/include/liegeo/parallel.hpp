#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace liegeo {

// Thread budget for internal loops, capped by the LIEGEO_THREADS environment
// variable. A cap of 1 disables spawning entirely.
inline int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw ? static_cast<int>(hw) : 1;
    if (const char* env = std::getenv("LIEGEO_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

// Static block partition; each index is written by exactly one worker, so
// results do not depend on scheduling.
inline void parallel_for(int begin, int end, const std::function<void(int)>& body) {
    const int count = end - begin;
    if (count <= 0) return;
    int nthreads = thread_budget();
    if (nthreads > count) nthreads = count;
    if (nthreads <= 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const int chunk = (count + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        const int lo = begin + t * chunk;
        const int hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace liegeo
