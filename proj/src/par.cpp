#include "dognose/par.hpp"

namespace dognose::par {

namespace {
int g_threads = 1;
}

int threads() { return g_threads; }

void set_threads(int n) {
#ifdef _OPENMP
    if (n <= 0) n = omp_get_max_threads();
#else
    if (n <= 0) n = 1;
#endif
    g_threads = n;
}

}  // namespace dognose::par
