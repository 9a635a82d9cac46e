#pragma once

#include <cstdint>
#include <exception>
#include <omp.h>

namespace fpp {

/// Worker count for OpenMP kernels. 0 selects the OpenMP default; 1 runs the
/// plain serial loop.
struct Exec {
    int workers = 0;

    int threads() const { return workers > 0 ? workers : omp_get_max_threads(); }
    bool serial() const { return workers == 1; }
};

/// Runs fn(i) for i in [0, n). Each index must write only to its own slot.
/// If any call throws, the exception from the lowest such index is rethrown
/// after the loop, whatever the schedule.
template <typename Fn>
void parallel_for(std::int64_t n, Exec exec, Fn&& fn) {
    if (exec.serial() || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first;
    std::int64_t first_index = n;
#pragma omp parallel for schedule(dynamic, 1) num_threads(exec.threads())
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(fpp_parallel_for_error)
            if (i < first_index) {
                first_index = i;
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace fpp
