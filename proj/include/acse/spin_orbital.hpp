#pragma once

// Embedding of spatial spin blocks into the dense spin-orbital picture and
// back. Spin orbitals are ordered [alpha 0..r-1 | beta r..2r-1]. Used by the
// explicit (test-scale) engines and the oracle; the production solver never
// materializes spin-orbital rank-4/rank-6 tensors.

#include "acse/rdm.hpp"
#include "acse/reduced_h.hpp"
#include "acse/tensor.hpp"

namespace acse {

inline Spin so_spin(std::size_t so, std::size_t r) { return so < r ? Spin::alpha : Spin::beta; }
inline std::size_t so_spatial(std::size_t so, std::size_t r) { return so < r ? so : so - r; }

inline Mat d1_to_so(const Rdm1& d1) {
    const std::size_t r = d1.r(), n = 2 * r;
    Mat m(n, n);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            m(i, j) = d1.a(i, j);
            m(i + r, j + r) = d1.b(i, j);
        }
    return m;
}

// D2-like objects (2-RDM, cumulant, M matrix, residual/update tensors): the
// stored blocks determine every spin sector through antisymmetry.
template <typename Blocked>
inline Tensor4 blocks_to_so(const Blocked& x) {
    const std::size_t r = x.r(), n = 2 * r;
    Tensor4 t(n);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < r; ++l) {
                    const double vaa = x.aa(i, j, k, l), vab = x.ab(i, j, k, l), vbb = x.bb(i, j, k, l);
                    t(i, j, k, l) = vaa;
                    t(i + r, j + r, k + r, l + r) = vbb;
                    t(i, j + r, k, l + r) = vab;
                    t(j + r, i, l + r, k) = vab;
                    t(i, j + r, l + r, k) = -vab;
                    t(j + r, i, k, l + r) = -vab;
                }
    return t;
}

template <typename Blocked>
inline Blocked so_to_blocks(const Tensor4& t) {
    const std::size_t n = t.dim(0), r = n / 2;
    Blocked x(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < r; ++l) {
                    x.aa(i, j, k, l) = t(i, j, k, l);
                    x.ab(i, j, k, l) = t(i, j + r, k, l + r);
                    x.bb(i, j, k, l) = t(i + r, j + r, k + r, l + r);
                }
    return x;
}

// Non-antisymmetrized two-body kernel: K^{PQ}_{RS} = K[p,q,r,s] when the
// spins pair as (P,R) and (Q,S), zero otherwise.
inline Tensor4 kernel_to_so(const Tensor4& k_spatial) {
    const std::size_t r = k_spatial.dim(0), n = 2 * r;
    Tensor4 t(n);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
            for (std::size_t u = 0; u < n; ++u)
                for (std::size_t v = 0; v < n; ++v) {
                    if (so_spin(p, r) != so_spin(u, r) || so_spin(q, r) != so_spin(v, r)) continue;
                    t(p, q, u, v) =
                        k_spatial(so_spatial(p, r), so_spatial(q, r), so_spatial(u, r), so_spatial(v, r));
                }
    return t;
}

}  // namespace acse
