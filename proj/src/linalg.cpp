#include "lpf/linalg.hpp"

#include <stdexcept>

namespace lpf {

Matrix multiply(const Matrix& A, const Matrix& B)
{
    if (A.cols != B.rows) throw std::invalid_argument("multiply: shape mismatch");
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const Rat& x = A(i, k);
            if (x == 0) continue;
            for (int j = 0; j < B.cols; ++j) C(i, j) += x * B(k, j);
        }
    return C;
}

std::vector<int> rref(Matrix& A)
{
    std::vector<int> piv;
    int r = 0;
    for (int c = 0; c < A.cols && r < A.rows; ++c) {
        int p = -1;
        for (int i = r; i < A.rows; ++i)
            if (A(i, c) != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        if (p != r)
            for (int j = 0; j < A.cols; ++j) std::swap(A(p, j), A(r, j));
        Rat inv = 1 / A(r, c);
        for (int j = c; j < A.cols; ++j) A(r, j) *= inv;
        for (int i = 0; i < A.rows; ++i) {
            if (i == r || A(i, c) == 0) continue;
            Rat f = A(i, c);
            for (int j = c; j < A.cols; ++j) A(i, j) -= f * A(r, j);
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

int rank(Matrix A)
{
    return static_cast<int>(rref(A).size());
}

std::vector<std::vector<Rat>> kernel(const Matrix& A0)
{
    Matrix A = A0;
    auto piv = rref(A);
    std::vector<bool> is_piv(A.cols, false);
    for (int c : piv) is_piv[c] = true;
    std::vector<std::vector<Rat>> basis;
    for (int f = 0; f < A.cols; ++f) {
        if (is_piv[f]) continue;
        std::vector<Rat> v(A.cols);
        v[f] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -A(static_cast<int>(r), f);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<std::vector<Rat>> solve(const Matrix& A, const std::vector<Rat>& b)
{
    if (static_cast<int>(b.size()) != A.rows) throw std::invalid_argument("solve: shape mismatch");
    Matrix M(A.rows, A.cols + 1);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) M(i, j) = A(i, j);
        M(i, A.cols) = b[i];
    }
    auto piv = rref(M);
    if (!piv.empty() && piv.back() == A.cols) return std::nullopt;
    std::vector<Rat> x(A.cols);
    for (size_t r = 0; r < piv.size(); ++r) x[piv[r]] = M(static_cast<int>(r), A.cols);
    return x;
}

} // namespace lpf
