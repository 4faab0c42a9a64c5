#pragma once

#include <vector>

#include "poseadapt/core/tensor.hpp"

namespace poseadapt {

/// Parallel loop over [0, n). Each index must be independent of the others;
/// results are then identical for any thread count.
template <class F>
inline void parallel_for(long n, F&& f) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) f(i);
}

/// Deterministic parallel reduction: the range is cut into a fixed number of
/// chunks, partial sums are computed in parallel, and the partials are folded
/// serially in chunk order. The result does not depend on the thread count.
template <class F>
inline real parallel_sum(long n, F&& f) {
    if (n <= 0) return real(0);
    const long kChunks = 64;
    const long chunks = n < kChunks ? n : kChunks;
    const long step = (n + chunks - 1) / chunks;
    std::vector<real> partial(static_cast<size_t>(chunks), real(0));
#pragma omp parallel for schedule(static)
    for (long c = 0; c < chunks; ++c) {
        const long lo = c * step;
        const long hi = lo + step < n ? lo + step : n;
        real s = 0;
        for (long i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<size_t>(c)] = s;
    }
    real total = 0;
    for (real p : partial) total += p;
    return total;
}

}  // namespace poseadapt
