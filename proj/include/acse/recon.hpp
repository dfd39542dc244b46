#pragma once

// Cumulant decomposition of the 3-RDM and the Valdemoro / Nakatsuji-Yasuda
// reconstruction functionals in explicit (test-scale, spin-orbital) form.
// Production code routes through the fused contractions in residual.hpp and
// never materializes a rank-6 tensor.

#include <stdexcept>
#include <vector>

#include "acse/orbital_space.hpp"
#include "acse/rdm.hpp"
#include "acse/spin_orbital.hpp"
#include "acse/tensor.hpp"

namespace acse {

enum class ReconstructionKind { Valdemoro, NakatsujiYasuda };

// M^{ij}_{rq} = 3 * 2Delta^{ij}_{rq} + (1/2)(1D^i_r 1D^j_q - 1D^j_r 1D^i_q),
// spin-blocked like the 2-RDM; same-spin blocks are antisymmetric.
struct MMatrix {
    Tensor4 aa, ab, bb;
    explicit MMatrix(std::size_t r = 0) : aa(r), ab(r), bb(r) {}
    std::size_t r() const { return aa.dim(0); }
};

inline MMatrix build_M(const Cumulant2& dl2, const Rdm1& d1) {
    const std::size_t r = dl2.r();
    if (r != d1.r()) throw std::invalid_argument("build_M: dimension mismatch");
    MMatrix m(r);
    m.aa = wedge_same_spin(d1.a);
    m.ab = wedge_mixed_spin(d1.a, d1.b);
    m.bb = wedge_same_spin(d1.b);
    for (std::size_t x = 0; x < m.aa.size(); ++x) {
        m.aa.data()[x] += 3.0 * dl2.aa.data()[x];
        m.ab.data()[x] += 3.0 * dl2.ab.data()[x];
        m.bb.data()[x] += 3.0 * dl2.bb.data()[x];
    }
    return m;
}

// +1 for orbitals occupied in the aufbau-filled reference, -1 otherwise.
struct OccupationSignature {
    std::vector<int> alpha, beta;

    static OccupationSignature aufbau(const OrbitalSpace& space) {
        OccupationSignature s;
        s.alpha.assign(space.r, -1);
        s.beta.assign(space.r, -1);
        for (std::size_t i = 0; i < space.n_alpha; ++i) s.alpha[i] = +1;
        for (std::size_t i = 0; i < space.n_beta; ++i) s.beta[i] = +1;
        return s;
    }
    int so(std::size_t so_idx, std::size_t r) const {
        return so_idx < r ? alpha[so_idx] : beta[so_idx - r];
    }
    std::size_t r() const { return alpha.size(); }
};

// 3D_V^{ijp}_{rql} = (1/9)[ M^{ij}_{rq} D^p_l - M^{ij}_{lq} D^p_r - M^{ij}_{rl} D^p_q
//                         - M^{ip}_{rq} D^j_l + M^{ip}_{lq} D^j_r + M^{ip}_{rl} D^j_q
//                         + M^{jp}_{rq} D^i_l - M^{jp}_{lq} D^i_r - M^{jp}_{rl} D^i_q ],
// assembled in the spin-orbital basis; the 3-cumulant is dropped.
inline Rdm3 reconstruct_3rdm_valdemoro(const MMatrix& m, const Rdm1& d1) {
    const std::size_t r = m.r(), n = 2 * r;
    if (n > Rdm3::max_spin_orbitals)
        throw std::invalid_argument("reconstruct_3rdm_valdemoro: explicit path capped at 12 spin orbitals");
    const Tensor4 ms = blocks_to_so(m);
    const Mat ds = d1_to_so(d1);
    Rdm3 d3(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t rr = 0; rr < n; ++rr)
                    for (std::size_t q = 0; q < n; ++q)
                        for (std::size_t l = 0; l < n; ++l)
                            d3(i, j, p, rr, q, l) =
                                (1.0 / 9.0) *
                                (ms(i, j, rr, q) * ds(p, l) - ms(i, j, l, q) * ds(p, rr) -
                                 ms(i, j, rr, l) * ds(p, q) - ms(i, p, rr, q) * ds(j, l) +
                                 ms(i, p, l, q) * ds(j, rr) + ms(i, p, rr, l) * ds(j, q) +
                                 ms(j, p, rr, q) * ds(i, l) - ms(j, p, l, q) * ds(i, rr) -
                                 ms(j, p, rr, l) * ds(i, q));
    return d3;
}

// NY 3-cumulant, simplified nine-term form (each unique product appears four
// times in the full antisymmetrization):
// 3Delta^{ijp}_{rql} = (1/6) sum_a sigma_a [ 4 D^{ia}_{rq} D^{jp}_{al} - 4 D^{ja}_{rq} D^{ip}_{al}
//   - 4 D^{pa}_{rq} D^{ji}_{al} - 4 D^{ia}_{lq} D^{jp}_{ar} + 4 D^{ja}_{lq} D^{ip}_{ar}
//   + 4 D^{pa}_{lq} D^{ji}_{ar} - 4 D^{ia}_{rl} D^{jp}_{aq} + 4 D^{ja}_{rl} D^{ip}_{aq}
//   + 4 D^{pa}_{rl} D^{ji}_{aq} ]   (D here is the 2-cumulant)
inline Rdm3 ny_cumulant3(const Cumulant2& dl2, const OccupationSignature& sig) {
    const std::size_t r = dl2.r(), n = 2 * r;
    if (sig.r() != r) throw std::invalid_argument("ny_cumulant3: signature length mismatch");
    if (n > Rdm3::max_spin_orbitals)
        throw std::invalid_argument("ny_cumulant3: explicit path capped at 12 spin orbitals");
    const Tensor4 c = blocks_to_so(dl2);
    Rdm3 d3(n);
    const double w = 4.0 / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < n; ++p)
                for (std::size_t rr = 0; rr < n; ++rr)
                    for (std::size_t q = 0; q < n; ++q)
                        for (std::size_t l = 0; l < n; ++l) {
                            double s = 0.0;
                            for (std::size_t a = 0; a < n; ++a) {
                                const double sg = sig.so(a, r);
                                s += sg * (c(i, a, rr, q) * c(j, p, a, l) - c(j, a, rr, q) * c(i, p, a, l) -
                                           c(p, a, rr, q) * c(j, i, a, l) - c(i, a, l, q) * c(j, p, a, rr) +
                                           c(j, a, l, q) * c(i, p, a, rr) + c(p, a, l, q) * c(j, i, a, rr) -
                                           c(i, a, rr, l) * c(j, p, a, q) + c(j, a, rr, l) * c(i, p, a, q) +
                                           c(p, a, rr, l) * c(j, i, a, q));
                            }
                            d3(i, j, p, rr, q, l) = w * s;
                        }
    return d3;
}

// Unsimplified 36-term form: the full antisymmetrizer over the upper and lower
// index triples applied to D^{ia}_{rq} D^{jp}_{al}, keeping a fixed. Test
// oracle for the nine-term form.
inline Rdm3 ny_cumulant3_full_antisymmetrizer(const Cumulant2& dl2, const OccupationSignature& sig) {
    const std::size_t r = dl2.r(), n = 2 * r;
    if (sig.r() != r) throw std::invalid_argument("ny_cumulant3: signature length mismatch");
    if (n > Rdm3::max_spin_orbitals)
        throw std::invalid_argument("ny_cumulant3: explicit path capped at 12 spin orbitals");
    const Tensor4 c = blocks_to_so(dl2);
    static constexpr int perm3[6][4] = {{0, 1, 2, +1}, {0, 2, 1, -1}, {1, 0, 2, -1},
                                        {1, 2, 0, +1}, {2, 0, 1, +1}, {2, 1, 0, -1}};
    Rdm3 d3(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < n; ++p) {
                const std::size_t up[3] = {i, j, p};
                for (std::size_t rr = 0; rr < n; ++rr)
                    for (std::size_t q = 0; q < n; ++q)
                        for (std::size_t l = 0; l < n; ++l) {
                            const std::size_t lo[3] = {rr, q, l};
                            double s = 0.0;
                            for (std::size_t a = 0; a < n; ++a) {
                                const double sg = sig.so(a, r);
                                double t = 0.0;
                                for (const auto& pu : perm3)
                                    for (const auto& pl : perm3)
                                        t += pu[3] * pl[3] *
                                             c(up[pu[0]], a, lo[pl[0]], lo[pl[1]]) *
                                             c(up[pu[1]], up[pu[2]], a, lo[pl[2]]);
                                s += sg * t;
                            }
                            d3(i, j, p, rr, q, l) = s / 6.0;
                        }
            }
    return d3;
}

}  // namespace acse
