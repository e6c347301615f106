#pragma once

#include <exception>
#include <vector>

#include <omp.h>

namespace fpp {

// serial runs the same chunk decomposition in one thread; it is the
// reference implementation that the parallel path must reproduce bit for bit.
enum class Exec { parallel, serial };

// 0 keeps the OpenMP default.
void set_threads(int n);
int max_threads();

// Calls f(i) for i in [0, n). Each index must write only its own output slot.
// If calls throw, the exception of the lowest index is rethrown afterwards.
template <class F>
void for_each_index(long long n, Exec ex, F&& f) {
    if (ex == Exec::serial || n <= 1) {
        for (long long i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> err(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            err[i] = std::current_exception();
        }
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
}

} // namespace fpp
