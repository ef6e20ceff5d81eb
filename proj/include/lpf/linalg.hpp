#pragma once

#include "lpf/rational.hpp"

#include <optional>
#include <vector>

namespace lpf {

// dense exact matrices, row-major
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<Rat> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

    Rat& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Rat& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

Matrix multiply(const Matrix& A, const Matrix& B);

// reduced row echelon form in place; returns pivot columns
std::vector<int> rref(Matrix& A);

int rank(Matrix A);

// basis of {v : A v = 0}
std::vector<std::vector<Rat>> kernel(const Matrix& A);

// some x with A x = b, if one exists
std::optional<std::vector<Rat>> solve(const Matrix& A, const std::vector<Rat>& b);

} // namespace lpf
