#include "qplab/util.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

namespace qplab::util {

namespace {

std::atomic<int> g_override{0};

int default_workers() {
    if (const char* env = std::getenv("QPLAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<int>(hw > 8 ? 8 : hw);
}

}  // namespace

int worker_count() {
    int o = g_override.load();
    return o >= 1 ? o : default_workers();
}

void set_worker_count(int n) { g_override.store(n >= 1 ? n : 0); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& range_fn) {
    const std::size_t workers = static_cast<std::size_t>(worker_count());
    if (n == 0) return;
    if (workers <= 1 || n < 2 * workers) {
        range_fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = n * w / workers;
        std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&range_fn, &errs, w, lo, hi] {
            try {
                range_fn(lo, hi);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    // Rethrow the lowest-indexed failure so the surfaced error does not depend
    // on thread scheduling.
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& f) {
    parallel_for(n, [&f](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) f(i);
    });
}

double tree_sum(const std::vector<double>& v) {
    // Recursive halving with a leaf size of 8; the bracketing of the sum is a
    // function of v.size() only, never of the thread layout.
    struct Rec {
        static double sum(const double* p, std::size_t n) {
            if (n <= 8) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += p[i];
                return s;
            }
            std::size_t h = n / 2;
            return sum(p, h) + sum(p + h, n - h);
        }
    };
    return v.empty() ? 0.0 : Rec::sum(v.data(), v.size());
}

double tree_mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : tree_sum(v) / static_cast<double>(v.size());
}

}  // namespace qplab::util
