#pragma once

// Reduced two-body Hamiltonian 2K and the energy functionals. 2K embeds the
// one-electron part so that H_elec = sum_pqrs 2K^{pq}_{rs} a+_p a+_q a_s a_r
// holds as an operator identity on the N-electron sector:
//
//   2K^{pq}_{rs} = 2V^{pq}_{rs} + [1K^p_r d_qs + 1K^q_s d_pr] / (2(N-1))
//
// with 2V the stored Hamiltonian coefficient (1/2)<pq|rs>. The energy is then
// E = 2 * sum over spin-orbital sectors of 2K . 2D + e_nuc, where the ab block
// enters twice (alpha-beta and beta-alpha sectors) — the prefactor 2 cancels
// the 1/2 normalization of the 2-RDM.

#include <stdexcept>

#include "acse/fcidump.hpp"
#include "acse/orbital_space.hpp"
#include "acse/rdm.hpp"
#include "acse/tensor.hpp"

namespace acse {

struct ReducedH {
    Tensor4 twoK;  // spatial; same kernel serves every spin sector
    std::size_t n_electrons = 0;
    double e_nuc = 0.0;

    std::size_t r() const { return twoK.dim(0); }
};

inline ReducedH build_reduced_hamiltonian(const IntegralSet& ints, const OrbitalSpace& space) {
    space.require_pair_count();
    const std::size_t r = ints.r();
    if (r != space.r) throw std::invalid_argument("build_reduced_hamiltonian: dimension mismatch");
    ReducedH kh;
    kh.n_electrons = space.n_electrons();
    kh.e_nuc = ints.e_nuc;
    kh.twoK = ints.twoV;
    const double c = 1.0 / (2.0 * (static_cast<double>(kh.n_electrons) - 1.0));
    for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q)
            for (std::size_t s = 0; s < r; ++s) {
                kh.twoK(p, q, s, q) += c * ints.oneK(p, s);  // 1K^p_r d_qs term (r=s slot)
                kh.twoK(q, p, q, s) += c * ints.oneK(p, s);  // 1K^q_s d_pr term
            }
    return kh;
}

namespace detail {

inline double sector_weighted_dot(const Tensor4& k, const Rdm2& d2) {
    const std::size_t r = k.dim(0);
    double s = 0.0;
    for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q)
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t v = 0; v < r; ++v) {
                    const double kv = k(p, q, u, v);
                    s += kv * (d2.aa(p, q, u, v) + 2.0 * d2.ab(p, q, u, v) + d2.bb(p, q, u, v));
                }
    return s;
}

}  // namespace detail

inline double energy_from_reducedH(const ReducedH& kh, const Rdm2& d2) {
    if (kh.r() != d2.r()) throw std::invalid_argument("energy_from_reducedH: dimension mismatch");
    return 2.0 * detail::sector_weighted_dot(kh.twoK, d2) + kh.e_nuc;
}

// Independent energy path straight from the raw integrals; used to pin the
// reduced-Hamiltonian normalization.
inline double energy_from_integrals(const IntegralSet& ints, const Rdm1& d1, const Rdm2& d2) {
    if (ints.r() != d2.r() || ints.r() != d1.r())
        throw std::invalid_argument("energy_from_integrals: dimension mismatch");
    const std::size_t r = ints.r();
    double e1 = 0.0;
    for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; q < r; ++q) e1 += ints.oneK(p, q) * (d1.a(p, q) + d1.b(p, q));
    const double e2 = 2.0 * detail::sector_weighted_dot(ints.twoV, d2);
    return e1 + e2 + ints.e_nuc;
}

}  // namespace acse
