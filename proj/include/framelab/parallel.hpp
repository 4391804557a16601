#pragma once

// Block-parallel evaluation with an in-order consumer. Results never depend
// on the worker count: every block is fully evaluated, then consumed
// sequentially in index order.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace framelab {

/// Evaluates `eval(i)` for i in [0, n) in blocks and feeds the results to
/// `consume(i, result)` in index order. `consume` returns false to stop.
/// Returns the number of items consumed.
template <class Eval, class Consume>
std::size_t ordered_scan(std::size_t n, unsigned workers, Eval&& eval, Consume&& consume) {
    using Result = decltype(eval(std::size_t{0}));
    workers = std::max(1u, workers);
    const std::size_t block = workers == 1 ? std::min<std::size_t>(n, 4096) : std::size_t{1024} * workers;
    std::vector<Result> results;
    std::size_t start = 0;
    while (start < n) {
        const std::size_t len = std::min(block, n - start);
        results.assign(len, Result{});
        if (workers == 1 || len < 64) {
            for (std::size_t k = 0; k < len; ++k) results[k] = eval(start + k);
        } else {
            std::vector<std::exception_ptr> errors(workers);
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t k = w; k < len; k += workers) results[k] = eval(start + k);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (std::size_t k = 0; k < len; ++k) {
            if (!consume(start + k, results[k])) return start + k + 1;
        }
        start += len;
    }
    return n;
}

}  // namespace framelab
