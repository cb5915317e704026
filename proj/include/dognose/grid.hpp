#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace dognose {

// Flat row-major 2D array, i fastest. Used for cell-centered and
// face-centered fields alike; the owner tracks which staggering applies.
template <typename T>
struct Field2 {
    int nx = 0;
    int ny = 0;
    std::vector<T> a;

    Field2() = default;
    Field2(int nx_, int ny_, T init = T{}) { resize(nx_, ny_, init); }

    void resize(int nx_, int ny_, T init = T{}) {
        nx = nx_;
        ny = ny_;
        a.assign(static_cast<size_t>(nx) * static_cast<size_t>(ny), init);
    }
    void fill(T v) { std::fill(a.begin(), a.end(), v); }

    T& operator()(int i, int j) {
        assert(i >= 0 && i < nx && j >= 0 && j < ny);
        return a[static_cast<size_t>(j) * nx + i];
    }
    T operator()(int i, int j) const {
        assert(i >= 0 && i < nx && j >= 0 && j < ny);
        return a[static_cast<size_t>(j) * nx + i];
    }

    T* row(int j) { return a.data() + static_cast<size_t>(j) * nx; }
    const T* row(int j) const { return a.data() + static_cast<size_t>(j) * nx; }

    size_t size() const { return a.size(); }
    int idx(int i, int j) const { return j * nx + i; }

    bool operator==(const Field2& o) const { return nx == o.nx && ny == o.ny && a == o.a; }
};

using Field2d = Field2<double>;

}  // namespace dognose
