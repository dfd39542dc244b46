#pragma once

// Desk-scale full CI: determinant enumeration in a fixed (n_alpha, n_beta)
// sector, Slater-Condon matrix elements over bitmask determinants, a dense
// eigensolver path for small bases and a block Davidson path for large ones,
// exact 1-/2-/3-RDM extraction, and brute-force commutator expectations.
//
// All creation/annihilation phases come from one pair of bit-counting
// primitives; the sign convention is anchored by the one- and two-orbital
// tests against explicit operator algebra.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "acse/fcidump.hpp"
#include "acse/orbital_space.hpp"
#include "acse/rdm.hpp"
#include "acse/spin_orbital.hpp"
#include "acse/sym_eig.hpp"
#include "acse/tensor.hpp"

namespace acse {

constexpr std::size_t fci_dense_cap = 2000;
constexpr std::size_t fci_sparse_cap = 1000000;

class fci_cap_error : public std::runtime_error {
  public:
    explicit fci_cap_error(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------

namespace detail {

inline int count_bits_below(std::uint64_t mask, unsigned s) {
    return __builtin_popcountll(mask & ((1ull << s) - 1ull));
}

}  // namespace detail

// a_s |mask>: returns phase (+1/-1) and updates mask, or 0 if s unoccupied.
inline int fock_annihilate(std::uint64_t& mask, unsigned s) {
    if (!((mask >> s) & 1ull)) return 0;
    const int ph = (detail::count_bits_below(mask, s) & 1) ? -1 : 1;
    mask &= ~(1ull << s);
    return ph;
}

// a+_s |mask>
inline int fock_create(std::uint64_t& mask, unsigned s) {
    if ((mask >> s) & 1ull) return 0;
    const int ph = (detail::count_bits_below(mask, s) & 1) ? -1 : 1;
    mask |= 1ull << s;
    return ph;
}

// ---------------------------------------------------------------------------

struct DeterminantBasis {
    std::size_t r = 0, n_alpha = 0, n_beta = 0;
    std::vector<std::uint32_t> astrings, bstrings;  // lexicographic (ascending mask value)
    std::unordered_map<std::uint32_t, std::uint32_t> aindex, bindex;

    std::size_t size() const { return astrings.size() * bstrings.size(); }
    std::size_t n_so() const { return 2 * r; }

    std::uint64_t mask_of(std::size_t det) const {
        const std::size_t ia = det / bstrings.size(), ib = det % bstrings.size();
        return static_cast<std::uint64_t>(astrings[ia]) |
               (static_cast<std::uint64_t>(bstrings[ib]) << r);
    }
    // -1 when the mask leaves the (n_alpha, n_beta) sector
    long index_of(std::uint64_t mask) const {
        const std::uint32_t am = static_cast<std::uint32_t>(mask & ((1ull << r) - 1ull));
        const std::uint32_t bm = static_cast<std::uint32_t>(mask >> r);
        const auto ia = aindex.find(am);
        if (ia == aindex.end()) return -1;
        const auto ib = bindex.find(bm);
        if (ib == bindex.end()) return -1;
        return static_cast<long>(ia->second) * static_cast<long>(bstrings.size()) +
               static_cast<long>(ib->second);
    }
};

namespace detail {

inline std::vector<std::uint32_t> enumerate_strings(std::size_t r, std::size_t n) {
    std::vector<std::uint32_t> out;
    if (n > r) return out;
    if (n == 0) {
        out.push_back(0);
        return out;
    }
    std::uint32_t v = (1u << n) - 1u;
    const std::uint32_t limit = (r == 32) ? 0xffffffffu : ((1u << r) - 1u);
    while (v <= limit) {
        out.push_back(v);
        const std::uint32_t t = v | (v - 1u);
        const std::uint32_t next =
            (t + 1u) | (((~t & (t + 1u)) - 1u) >> (__builtin_ctz(v) + 1));
        if (next <= v) break;
        v = next;
    }
    return out;
}

}  // namespace detail

inline DeterminantBasis make_determinant_basis(const OrbitalSpace& space) {
    space.validate();
    if (2 * space.r > 48) throw fci_cap_error("determinant basis: too many spin orbitals for bitmask storage");
    DeterminantBasis b;
    b.r = space.r;
    b.n_alpha = space.n_alpha;
    b.n_beta = space.n_beta;
    b.astrings = detail::enumerate_strings(space.r, space.n_alpha);
    b.bstrings = detail::enumerate_strings(space.r, space.n_beta);
    for (std::uint32_t i = 0; i < b.astrings.size(); ++i) b.aindex[b.astrings[i]] = i;
    for (std::uint32_t i = 0; i < b.bstrings.size(); ++i) b.bindex[b.bstrings[i]] = i;
    return b;
}

struct FciState {
    double energy = 0.0;  // includes e_nuc
    std::vector<double> coeff;
    int index = 0;  // 0 = ground
};

// ---------------------------------------------------------------------------
// Slater-Condon machinery over raw integrals

class SlaterCondon {
  public:
    SlaterCondon(const IntegralSet& ints, const DeterminantBasis& basis) : ints_(&ints), basis_(&basis) {
        r_ = basis.r;
    }

    double h(unsigned p, unsigned q) const {  // spin orbitals, same spin assumed checked
        return ints_->oneK(so_spatial(p, r_), so_spatial(q, r_));
    }
    double g(unsigned p, unsigned q, unsigned u, unsigned v) const {  // <pq|uv>, spin checked
        if (so_spin(p, r_) != so_spin(u, r_) || so_spin(q, r_) != so_spin(v, r_)) return 0.0;
        return ints_->raw_eri(so_spatial(p, r_), so_spatial(q, r_), so_spatial(u, r_), so_spatial(v, r_));
    }

    double diagonal(std::uint64_t mask) const {
        std::vector<unsigned> occ = occ_list(mask);
        double e = ints_->e_nuc;
        for (unsigned p : occ) e += h(p, p);
        for (std::size_t x = 0; x < occ.size(); ++x)
            for (std::size_t y = 0; y < occ.size(); ++y) {
                if (x == y) continue;
                e += 0.5 * (g(occ[x], occ[y], occ[x], occ[y]) - g(occ[x], occ[y], occ[y], occ[x]));
            }
        return e;
    }

    // Visit every determinant connected to det by a single or double
    // excitation, with the signed Slater-Condon matrix element
    // H_{target,det} = H_{det,target}. The diagonal is not visited.
    template <typename Fn>
    void for_connected(std::size_t det, Fn&& fn) const {
        const std::uint64_t mask = basis_->mask_of(det);
        const std::vector<unsigned> occ = occ_list(mask);
        const std::vector<unsigned> vir = vir_list(mask);

        // singles: coefficient h_QP + sum_M [<QM|PM> - <QM|MP>] on a+_Q a_P
        for (unsigned p : occ)
            for (unsigned q : vir) {
                if (so_spin(p, r_) != so_spin(q, r_)) continue;
                std::uint64_t m = mask;
                int ph = fock_annihilate(m, p);
                ph *= fock_create(m, q);
                const long tgt = basis_->index_of(m);
                if (tgt < 0) continue;
                double val = h(q, p);
                for (unsigned mm : occ) {
                    if (mm == p) continue;
                    val += g(q, mm, p, mm) - g(q, mm, mm, p);
                }
                fn(static_cast<std::size_t>(tgt), ph * val);
            }

        // doubles: coefficient <Q1Q2|P1P2> - <Q1Q2|P2P1> on a+_Q1 a+_Q2 a_P2 a_P1
        for (std::size_t x = 0; x < occ.size(); ++x)
            for (std::size_t y = x + 1; y < occ.size(); ++y) {
                const unsigned p1 = occ[x], p2 = occ[y];
                for (std::size_t u = 0; u < vir.size(); ++u)
                    for (std::size_t v = u + 1; v < vir.size(); ++v) {
                        const unsigned q1 = vir[u], q2 = vir[v];
                        const double val = g(q1, q2, p1, p2) - g(q1, q2, p2, p1);
                        if (val == 0.0) continue;
                        std::uint64_t m = mask;
                        int ph = fock_annihilate(m, p1);
                        ph *= fock_annihilate(m, p2);
                        ph *= fock_create(m, q2);
                        ph *= fock_create(m, q1);
                        const long tgt = basis_->index_of(m);
                        if (tgt < 0) continue;
                        fn(static_cast<std::size_t>(tgt), static_cast<double>(ph) * val);
                    }
            }
    }

    // sigma[i] = sum_j H_ij c[j] for one output determinant i
    double sigma_element(std::size_t det, const std::vector<double>& c) const {
        double s = diagonal(basis_->mask_of(det)) * c[det];
        for_connected(det, [&](std::size_t tgt, double val) { s += val * c[tgt]; });
        return s;
    }

    void matvec(const std::vector<double>& c, std::vector<double>& out) const {
        out.assign(basis_->size(), 0.0);
        parallel_for(basis_->size(), [&](std::size_t det) { out[det] = sigma_element(det, c); });
    }

    // brute-force <I|H|J> by full operator application; test anchor
    double element_bruteforce(std::size_t deti, std::size_t detj) const {
        const std::uint64_t mj = basis_->mask_of(detj);
        const std::uint64_t mi = basis_->mask_of(deti);
        const unsigned n = static_cast<unsigned>(2 * r_);
        double val = (deti == detj) ? ints_->e_nuc : 0.0;
        for (unsigned p = 0; p < n; ++p)
            for (unsigned q = 0; q < n; ++q) {
                if (so_spin(p, r_) != so_spin(q, r_)) continue;
                std::uint64_t m = mj;
                int ph = fock_annihilate(m, q);
                if (!ph) continue;
                ph *= fock_create(m, p);
                if (!ph || m != mi) continue;
                val += ph * h(p, q);
            }
        for (unsigned p = 0; p < n; ++p)
            for (unsigned q = 0; q < n; ++q)
                for (unsigned u = 0; u < n; ++u)
                    for (unsigned v = 0; v < n; ++v) {
                        const double gv = g(p, q, u, v);
                        if (gv == 0.0) continue;
                        // (1/2) g(pq|uv junction) a+_p a+_q a_v a_u
                        std::uint64_t m = mj;
                        int ph = fock_annihilate(m, u);
                        if (!ph) continue;
                        ph *= fock_annihilate(m, v);
                        if (!ph) continue;
                        ph *= fock_create(m, q);
                        if (!ph) continue;
                        ph *= fock_create(m, p);
                        if (!ph || m != mi) continue;
                        val += 0.5 * ph * gv;
                    }
        return val;
    }

    std::vector<unsigned> occ_list(std::uint64_t mask) const {
        std::vector<unsigned> occ;
        for (unsigned s = 0; s < 2 * r_; ++s)
            if ((mask >> s) & 1ull) occ.push_back(s);
        return occ;
    }
    std::vector<unsigned> vir_list(std::uint64_t mask) const {
        std::vector<unsigned> vir;
        for (unsigned s = 0; s < 2 * r_; ++s)
            if (!((mask >> s) & 1ull)) vir.push_back(s);
        return vir;
    }

  private:
    const IntegralSet* ints_;
    const DeterminantBasis* basis_;
    std::size_t r_;
};

// ---------------------------------------------------------------------------
// block Davidson with diagonal preconditioner and deterministic unit starts

namespace detail {

inline void orthonormalize_against(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
            double d = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
        }
}

inline double norm2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

inline std::vector<FciState> davidson_solve(const SlaterCondon& sc, const DeterminantBasis& basis,
                                            std::size_t n_states) {
    const std::size_t dim = basis.size();
    std::vector<double> diag(dim);
    parallel_for(dim, [&](std::size_t d) { diag[d] = sc.diagonal(basis.mask_of(d)); });

    // track a few extra roots beyond the requested ones; quasi-degenerate
    // low-lying manifolds (stretched chains) converge only once their
    // near-degenerate partners live in the subspace
    const std::size_t nroot = std::min(dim, n_states + 4);
    const std::size_t nguess = std::min(dim, std::max<std::size_t>(2 * nroot, nroot + 2));
    const std::size_t max_sub = std::min(dim, std::max<std::size_t>(12 * nroot, 72));
    constexpr double tol = 1e-9;
    constexpr int max_iter = 500;

    // lowest-diagonal determinants, ties broken by index
    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });

    // deterministic guesses: eigenvectors of the dense subproblem over the
    // lowest-diagonal determinants, so that near-degenerate reference
    // manifolds start resolved
    std::vector<std::vector<double>> bvecs, sigmas;
    {
        const std::size_t nsub = std::min(dim, std::max<std::size_t>(8 * nguess, 64));
        std::unordered_map<std::size_t, std::size_t> sub_index;
        for (std::size_t g = 0; g < nsub; ++g) sub_index[order[g]] = g;
        Mat hsub(nsub, nsub);
        for (std::size_t g = 0; g < nsub; ++g) {
            const std::size_t det = order[g];
            hsub(g, g) = diag[det];
            sc.for_connected(det, [&](std::size_t tgt, double val) {
                const auto it = sub_index.find(tgt);
                if (it != sub_index.end()) hsub(it->second, g) += val;
            });
        }
        for (std::size_t i = 0; i < nsub; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double m = 0.5 * (hsub(i, j) + hsub(j, i));
                hsub(i, j) = hsub(j, i) = m;
            }
        const SymEig es = sym_eig(hsub);
        for (std::size_t g = 0; g < nguess; ++g) {
            std::vector<double> v(dim, 0.0);
            for (std::size_t s = 0; s < nsub; ++s) v[order[s]] = es.vectors(g, s);
            bvecs.push_back(std::move(v));
        }
    }

    const bool verbose = std::getenv("ACSE_DAVIDSON_VERBOSE") != nullptr;

    std::vector<FciState> out;
    for (int iter = 0; iter < max_iter; ++iter) {
        while (sigmas.size() < bvecs.size()) {
            std::vector<double> s;
            sc.matvec(bvecs[sigmas.size()], s);
            sigmas.push_back(std::move(s));
        }
        const std::size_t nb = bvecs.size();
        Mat sub(nb, nb);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                sub(i, j) = std::inner_product(bvecs[i].begin(), bvecs[i].end(), sigmas[j].begin(), 0.0);
        // symmetrize away round-off
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double m = 0.5 * (sub(i, j) + sub(j, i));
                sub(i, j) = sub(j, i) = m;
            }
        const SymEig es = sym_eig(sub);

        const std::size_t nblock = std::min(nroot, nb);
        std::vector<std::vector<double>> ritz(nblock), resid(nblock);
        std::vector<double> theta(nblock);
        bool all_conv = true;
        for (std::size_t k = 0; k < nblock; ++k) {
            theta[k] = es.values[k];
            ritz[k].assign(dim, 0.0);
            resid[k].assign(dim, 0.0);
            for (std::size_t b = 0; b < nb; ++b) {
                const double w = es.vectors(k, b);
                for (std::size_t i = 0; i < dim; ++i) {
                    ritz[k][i] += w * bvecs[b][i];
                    resid[k][i] += w * sigmas[b][i];
                }
            }
            for (std::size_t i = 0; i < dim; ++i) resid[k][i] -= theta[k] * ritz[k][i];
            // only the requested states must converge; the extra block roots
            // are subspace helpers
            if (k < n_states && norm2(resid[k]) > tol) all_conv = false;
        }
        if (verbose)
            std::fprintf(stderr, "davidson iter %3d  nb %3zu  E0 %.12f  |r0| %.3e\n", iter, nb, theta[0],
                         norm2(resid[0]));

        if (all_conv || nb >= dim) {
            for (std::size_t k = 0; k < n_states; ++k) {
                FciState st;
                st.energy = theta[k];
                st.coeff = ritz[k];
                const double n = norm2(st.coeff);
                for (auto& x : st.coeff) x /= n;
                st.index = static_cast<int>(k);
                out.push_back(std::move(st));
            }
            return out;
        }

        if (nb + nblock > max_sub) {  // restart from an extended set of Ritz vectors
            const std::size_t keep = std::min(nb, 3 * nblock);
            std::vector<std::vector<double>> nb2;
            for (std::size_t k = 0; k < keep; ++k) {
                std::vector<double> v(dim, 0.0);
                for (std::size_t b = 0; b < nb; ++b) {
                    const double w = es.vectors(k, b);
                    for (std::size_t i = 0; i < dim; ++i) v[i] += w * bvecs[b][i];
                }
                orthonormalize_against(v, nb2);
                const double n = norm2(v);
                if (n > 1e-8) {
                    for (auto& x : v) x /= n;
                    nb2.push_back(std::move(v));
                }
            }
            bvecs = std::move(nb2);
            sigmas.clear();
            continue;
        }

        bool grew = false;
        for (std::size_t k = 0; k < nblock; ++k) {
            if (norm2(resid[k]) <= tol) continue;
            std::vector<double> t(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                double den = theta[k] - diag[i];
                if (std::abs(den) < 1e-8) den = (den < 0 ? -1e-8 : 1e-8);
                t[i] = resid[k][i] / den;
            }
            const double n0 = norm2(t);
            if (n0 < 1e-300) continue;
            for (auto& x : t) x /= n0;
            orthonormalize_against(t, bvecs);
            const double n = norm2(t);
            if (n > 1e-8) {  // relative to the normalized correction
                for (auto& x : t) x /= n;
                bvecs.push_back(std::move(t));
                grew = true;
            }
        }
        if (!grew) {  // stagnation: add next deterministic unit vector
            for (std::size_t g = 0; g < dim; ++g) {
                std::vector<double> v(dim, 0.0);
                v[order[g]] = 1.0;
                orthonormalize_against(v, bvecs);
                const double n = norm2(v);
                if (n > 1e-4) {
                    for (auto& x : v) x /= n;
                    bvecs.push_back(std::move(v));
                    grew = true;
                    break;
                }
            }
            if (!grew) throw std::runtime_error("davidson: subspace exhausted without convergence");
        }
    }
    throw std::runtime_error("davidson: not converged within the restart budget");
}

}  // namespace detail

inline std::vector<FciState> fci_solve(const IntegralSet& ints, const OrbitalSpace& space, std::size_t n_states) {
    const DeterminantBasis basis = make_determinant_basis(space);
    const std::size_t dim = basis.size();
    if (n_states < 1 || n_states > dim) throw std::invalid_argument("fci_solve: bad n_states");
    if (dim > fci_sparse_cap) throw fci_cap_error("fci_solve: basis exceeds the 10^6 determinant cap");
    const SlaterCondon sc(ints, basis);

    if (dim <= fci_dense_cap) {
        Mat h(dim, dim);
        parallel_for(dim, [&](std::size_t j) {
            h(j, j) = sc.diagonal(basis.mask_of(j));
            sc.for_connected(j, [&](std::size_t tgt, double val) { h(tgt, j) += val; });
        });
        // enforce exact symmetry
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double m = 0.5 * (h(i, j) + h(j, i));
                h(i, j) = h(j, i) = m;
            }
        const SymEig es = sym_eig(h);
        std::vector<FciState> out;
        for (std::size_t k = 0; k < n_states; ++k) {
            FciState st;
            st.energy = es.values[k];
            st.coeff.assign(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i) st.coeff[i] = es.vectors(k, i);
            st.index = static_cast<int>(k);
            out.push_back(std::move(st));
        }
        return out;
    }
    return detail::davidson_solve(sc, basis, n_states);
}

// ---------------------------------------------------------------------------
// exact RDMs from a CI vector

inline Rdm1 rdm1_from_state(const DeterminantBasis& basis, const FciState& st) {
    const std::size_t r = basis.r;
    Rdm1 d1(r);
    for (std::size_t det = 0; det < basis.size(); ++det) {
        const double cj = st.coeff[det];
        if (cj == 0.0) continue;
        const std::uint64_t mask = basis.mask_of(det);
        for (unsigned q = 0; q < 2 * r; ++q) {
            if (!((mask >> q) & 1ull)) continue;
            for (unsigned p = 0; p < 2 * r; ++p) {
                if (so_spin(p, r) != so_spin(q, r)) continue;
                std::uint64_t m = mask;
                int ph = fock_annihilate(m, q);
                ph *= fock_create(m, p);
                if (!ph) continue;
                const long tgt = basis.index_of(m);
                if (tgt < 0) continue;
                const double v = ph * st.coeff[static_cast<std::size_t>(tgt)] * cj;
                if (so_spin(p, r) == Spin::alpha)
                    d1.a(so_spatial(p, r), so_spatial(q, r)) += v;
                else
                    d1.b(so_spatial(p, r), so_spatial(q, r)) += v;
            }
        }
    }
    return d1;
}

inline Rdm2 rdm2_from_state(const DeterminantBasis& basis, const FciState& st) {
    const std::size_t r = basis.r, n = 2 * r;
    Tensor4 dso(n);
    for (std::size_t det = 0; det < basis.size(); ++det) {
        const double cj = st.coeff[det];
        if (cj == 0.0) continue;
        const std::uint64_t mask = basis.mask_of(det);
        for (unsigned k = 0; k < n; ++k) {
            if (!((mask >> k) & 1ull)) continue;
            for (unsigned l = k + 1; l < n; ++l) {
                if (!((mask >> l) & 1ull)) continue;
                std::uint64_t m1 = mask;
                int ph1 = fock_annihilate(m1, k);  // a_k first (rightmost)
                ph1 *= fock_annihilate(m1, l);
                for (unsigned i = 0; i < n; ++i) {
                    if ((m1 >> i) & 1ull) continue;
                    for (unsigned j = i + 1; j < n; ++j) {
                        if ((m1 >> j) & 1ull) continue;
                        std::uint64_t m2 = m1;
                        int ph = ph1 * fock_create(m2, j);
                        ph *= fock_create(m2, i);
                        const long tgt = basis.index_of(m2);
                        if (tgt < 0) continue;
                        // 2D^{ij}_{kl} = (1/2) <a+_i a+_j a_l a_k>
                        const double v = 0.5 * ph * st.coeff[static_cast<std::size_t>(tgt)] * cj;
                        dso(i, j, k, l) += v;
                        dso(j, i, k, l) -= v;
                        dso(i, j, l, k) -= v;
                        dso(j, i, l, k) += v;
                    }
                }
            }
        }
    }
    return so_to_blocks<Rdm2>(dso);
}

inline Rdm3 rdm3_from_state(const DeterminantBasis& basis, const FciState& st) {
    const std::size_t r = basis.r, n = 2 * r;
    if (n > Rdm3::max_spin_orbitals) throw fci_cap_error("rdm3_from_state: capped at 12 spin orbitals");
    Rdm3 d3(n);
    static constexpr int perm3[6][4] = {{0, 1, 2, +1}, {0, 2, 1, -1}, {1, 0, 2, -1},
                                        {1, 2, 0, +1}, {2, 0, 1, +1}, {2, 1, 0, -1}};
    for (std::size_t det = 0; det < basis.size(); ++det) {
        const double cj = st.coeff[det];
        if (cj == 0.0) continue;
        const std::uint64_t mask = basis.mask_of(det);
        for (unsigned l1 = 0; l1 < n; ++l1) {
            if (!((mask >> l1) & 1ull)) continue;
            for (unsigned l2 = l1 + 1; l2 < n; ++l2) {
                if (!((mask >> l2) & 1ull)) continue;
                for (unsigned l3 = l2 + 1; l3 < n; ++l3) {
                    if (!((mask >> l3) & 1ull)) continue;
                    std::uint64_t m1 = mask;
                    int ph1 = fock_annihilate(m1, l1);  // a_l first, then a_m, a_n
                    ph1 *= fock_annihilate(m1, l2);
                    ph1 *= fock_annihilate(m1, l3);
                    for (unsigned u1 = 0; u1 < n; ++u1) {
                        if ((m1 >> u1) & 1ull) continue;
                        for (unsigned u2 = u1 + 1; u2 < n; ++u2) {
                            if ((m1 >> u2) & 1ull) continue;
                            for (unsigned u3 = u2 + 1; u3 < n; ++u3) {
                                if ((m1 >> u3) & 1ull) continue;
                                std::uint64_t m2 = m1;
                                int ph = ph1 * fock_create(m2, u3);
                                ph *= fock_create(m2, u2);
                                ph *= fock_create(m2, u1);
                                const long tgt = basis.index_of(m2);
                                if (tgt < 0) continue;
                                const double v =
                                    (1.0 / 6.0) * ph * st.coeff[static_cast<std::size_t>(tgt)] * cj;
                                const unsigned uu[3] = {u1, u2, u3}, ll[3] = {l1, l2, l3};
                                for (const auto& pu : perm3)
                                    for (const auto& pl : perm3)
                                        d3(uu[pu[0]], uu[pu[1]], uu[pu[2]], ll[pl[0]], ll[pl[1]], ll[pl[2]]) +=
                                            pu[3] * pl[3] * v;
                            }
                        }
                    }
                }
            }
        }
    }
    return d3;
}

// ---------------------------------------------------------------------------
// brute-force two-body operator application and commutator expectations

// |out> = sum_{PQRS} G2so^{PQ}_{RS} a+_P a+_Q a_S a_R |in>
inline std::vector<double> apply_two_body(const DeterminantBasis& basis, const Tensor4& g2so,
                                          const std::vector<double>& in) {
    const std::size_t n = basis.n_so();
    std::vector<double> out(basis.size(), 0.0);
    for (std::size_t det = 0; det < basis.size(); ++det) {
        const double cj = in[det];
        if (cj == 0.0) continue;
        const std::uint64_t mask = basis.mask_of(det);
        for (unsigned rr = 0; rr < n; ++rr) {
            if (!((mask >> rr) & 1ull)) continue;
            std::uint64_t m1 = mask;
            const int ph1 = fock_annihilate(m1, rr);
            for (unsigned s = 0; s < n; ++s) {
                if (!((m1 >> s) & 1ull)) continue;
                std::uint64_t m2 = m1;
                const int ph2 = ph1 * fock_annihilate(m2, s);
                for (unsigned q = 0; q < n; ++q) {
                    if ((m2 >> q) & 1ull) continue;
                    std::uint64_t m3 = m2;
                    const int ph3 = ph2 * fock_create(m3, q);
                    for (unsigned p = 0; p < n; ++p) {
                        if ((m3 >> p) & 1ull) continue;
                        const double gv = g2so(p, q, rr, s);
                        if (gv == 0.0) continue;
                        std::uint64_t m4 = m3;
                        const int ph4 = ph3 * fock_create(m4, p);
                        const long tgt = basis.index_of(m4);
                        if (tgt < 0) continue;
                        out[static_cast<std::size_t>(tgt)] += gv * ph4 * cj;
                    }
                }
            }
        }
    }
    return out;
}

// <state| [a+_I a+_J a_L a_K, Op] |state> for one spin-orbital index quadruple,
// with Op given by its spin-orbital kernel. op_adjoint_sign: +1 if Op is
// Hermitian, -1 if anti-Hermitian.
inline double commutator_expectation(const DeterminantBasis& basis, const FciState& st,
                                     unsigned I, unsigned J, unsigned L, unsigned K,
                                     const std::vector<double>& op_psi, int op_adjoint_sign) {
    // <G+ psi | Op psi> - sign * <Op psi | G psi>
    auto apply_g = [&](unsigned a, unsigned b, unsigned c, unsigned d, std::vector<double>& out) {
        // a+_a a+_b a_c a_d applied to st.coeff (rightmost first)
        out.assign(basis.size(), 0.0);
        for (std::size_t det = 0; det < basis.size(); ++det) {
            const double cj = st.coeff[det];
            if (cj == 0.0) continue;
            std::uint64_t m = basis.mask_of(det);
            int ph = fock_annihilate(m, d);
            if (!ph) continue;
            ph *= fock_annihilate(m, c);
            if (!ph) continue;
            ph *= fock_create(m, b);
            if (!ph) continue;
            ph *= fock_create(m, a);
            if (!ph) continue;
            const long tgt = basis.index_of(m);
            if (tgt < 0) continue;
            out[static_cast<std::size_t>(tgt)] += ph * cj;
        }
    };
    std::vector<double> gdag_psi, g_psi;
    apply_g(K, L, J, I, gdag_psi);  // (a+_I a+_J a_L a_K)+ = a+_K a+_L a_J a_I
    apply_g(I, J, L, K, g_psi);
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t d = 0; d < basis.size(); ++d) {
        t1 += gdag_psi[d] * op_psi[d];
        t2 += op_psi[d] * g_psi[d];
    }
    return t1 - op_adjoint_sign * t2;
}

}  // namespace acse
