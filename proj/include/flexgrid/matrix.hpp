#pragma once

#include <cstddef>
#include <vector>

namespace flexgrid {

// dense row-major matrix of doubles; just enough for the network and the
// feature pipeline to share data
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c)
        : rows(r), cols(c),
          a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
    double at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)];
    }
    double* row(int r) { return a.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols); }
    const double* row(int r) const {
        return a.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
    }
};

} // namespace flexgrid
