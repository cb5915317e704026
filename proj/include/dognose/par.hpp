#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Row-level execution policy for the grid kernels.
//
// Every kernel is written once as a per-row body and dispatched either
// serially or across OpenMP threads. Rows are independent writes, max
// reductions are order-free, and sums use a fixed block decomposition, so
// serial and parallel execution produce bit-identical results. The serial
// path is the reference the parity tests and the kernel benchmark compare
// against.
namespace dognose::par {

int threads();
void set_threads(int n);  // n <= 1 selects the serial path

// Both dispatch paths must execute the exact same machine code for a row, or
// the compiler may contract floating-point operations differently in the two
// loop clones and break serial/parallel bit-identity. noipa pins one
// instantiation per body type.
template <class Body>
[[gnu::noipa]] inline void invoke_row(const Body& body, int j) {
    body(j);
}
template <class Body>
[[gnu::noipa]] inline double invoke_row_value(const Body& body, int j) {
    return body(j);
}

template <class Body>
inline void for_rows(int nrows, const Body& body) {
#ifdef _OPENMP
    if (threads() > 1) {
#pragma omp parallel for schedule(static) num_threads(threads())
        for (int j = 0; j < nrows; ++j) invoke_row(body, j);
        return;
    }
#endif
    for (int j = 0; j < nrows; ++j) invoke_row(body, j);
}

template <class Body>
inline double max_over_rows(int nrows, const Body& body) {
    double m = 0.0;
#ifdef _OPENMP
    if (threads() > 1) {
#pragma omp parallel for schedule(static) num_threads(threads()) reduction(max : m)
        for (int j = 0; j < nrows; ++j) m = std::max(m, invoke_row_value(body, j));
        return m;
    }
#endif
    for (int j = 0; j < nrows; ++j) m = std::max(m, invoke_row_value(body, j));
    return m;
}

// Deterministic sum: per-row partials accumulated in row order regardless of
// how rows were distributed over threads.
template <class Body>
inline double sum_over_rows(int nrows, const Body& body) {
#ifdef _OPENMP
    if (threads() > 1) {
        std::vector<double> partial(static_cast<size_t>(nrows));
#pragma omp parallel for schedule(static) num_threads(threads())
        for (int j = 0; j < nrows; ++j) partial[static_cast<size_t>(j)] = invoke_row_value(body, j);
        double s = 0.0;
        for (int j = 0; j < nrows; ++j) s += partial[static_cast<size_t>(j)];
        return s;
    }
#endif
    double s = 0.0;
    for (int j = 0; j < nrows; ++j) s += invoke_row_value(body, j);
    return s;
}

}  // namespace dognose::par
