#pragma once

// Dense real-symmetric eigensolver on top of LAPACK dsyev.

#include <stdexcept>
#include <vector>

#include "acse/tensor.hpp"

extern "C" void dsyev_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda, double* w,
                       double* work, const int* lwork, int* info);

namespace acse {

struct SymEig {
    std::vector<double> values;  // ascending
    Mat vectors;                 // row k = eigenvector of values[k]
};

inline SymEig sym_eig(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("sym_eig: square matrix required");
    const int n = static_cast<int>(a.rows());
    SymEig res;
    res.values.assign(static_cast<std::size_t>(n), 0.0);
    res.vectors = Mat(a.rows(), a.rows());
    if (n == 0) return res;

    // dsyev is column-major; a symmetric input needs no transpose. On exit the
    // j-th eigenvector is column j, i.e. contiguous length-n runs in our
    // row-major buffer, which is exactly the "row k = eigenvector" layout.
    std::vector<double> work_a(a.data(), a.data() + a.size());
    int info = 0, lwork = -1;
    double wkopt = 0.0;
    dsyev_("V", "U", &n, work_a.data(), &n, res.values.data(), &wkopt, &lwork, &info);
    lwork = static_cast<int>(wkopt);
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dsyev_("V", "U", &n, work_a.data(), &n, res.values.data(), work.data(), &lwork, &info);
    if (info != 0) throw std::runtime_error("sym_eig: dsyev failed, info=" + std::to_string(info));
    std::copy(work_a.begin(), work_a.end(), res.vectors.data());
    return res;
}

}  // namespace acse
