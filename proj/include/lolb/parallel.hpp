#pragma once

// OpenMP shims. Kernels use LOLB_OMP(...) so the build also works without
// OpenMP; every parallel loop writes disjoint outputs with a fixed per-element
// reduction order, so results do not depend on the thread count.

#if defined(_OPENMP)
#include <omp.h>
#define LOLB_PRAGMA(X) _Pragma(#X)
#define LOLB_OMP(ARGS) LOLB_PRAGMA(omp ARGS)
#else
#define LOLB_OMP(ARGS)
#endif

namespace lolb {

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace lolb
