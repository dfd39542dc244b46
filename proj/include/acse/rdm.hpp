#pragma once

// Spin-blocked 1-/2-RDM containers, the oracle-scale spin-orbital 3-RDM, trace
// normalizations, wedge products and the 2-body cumulant.
//
// Conventions: 2D^{ij}_{kl} = (1/2) <a+_i a+_j a_l a_k>, 3D^{ijk}_{lmn} =
// (1/6) <a+_i a+_j a+_k a_n a_m a_l>. Stored 2-RDM spin blocks are aa, ab, bb
// with the ab block in alpha-first order; beta-first elements follow by index
// transposition. Spin orbitals are numbered p (alpha block, 0..r-1) and p + r
// (beta block).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "acse/orbital_space.hpp"
#include "acse/sym_eig.hpp"
#include "acse/tensor.hpp"

namespace acse {

enum class Spin : int { alpha = 0, beta = 1 };

inline std::size_t so_index(std::size_t spatial, Spin s, std::size_t r) {
    return spatial + (s == Spin::beta ? r : 0);
}

struct Rdm1 {
    Mat a, b;
    explicit Rdm1(std::size_t r = 0) : a(r, r), b(r, r) {}
    std::size_t r() const { return a.rows(); }
    const Mat& spin(Spin s) const { return s == Spin::alpha ? a : b; }
    Mat& spin(Spin s) { return s == Spin::alpha ? a : b; }
};

struct Rdm2 {
    Tensor4 aa, ab, bb;
    explicit Rdm2(std::size_t r = 0) : aa(r), ab(r), bb(r) {}
    std::size_t r() const { return aa.dim(0); }
};

struct Cumulant2 {
    Tensor4 aa, ab, bb;
    explicit Cumulant2(std::size_t r = 0) : aa(r), ab(r), bb(r) {}
    std::size_t r() const { return aa.dim(0); }
};

// Oracle-scale spin-orbital 3-RDM over n_so = 2r spin orbitals, dense rank 6.
class Rdm3 {
  public:
    static constexpr std::size_t max_spin_orbitals = 12;

    Rdm3() = default;
    explicit Rdm3(std::size_t n_so) : n_(n_so) {
        if (n_so > max_spin_orbitals)
            throw std::invalid_argument("Rdm3: explicit 3-RDM capped at 12 spin orbitals");
        data_.assign(n_ * n_ * n_ * n_ * n_ * n_, 0.0);
    }
    std::size_t n_so() const { return n_; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m, std::size_t n) {
        return data_[((((i * n_ + j) * n_ + k) * n_ + l) * n_ + m) * n_ + n];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m, std::size_t n) const {
        return data_[((((i * n_ + j) * n_ + k) * n_ + l) * n_ + m) * n_ + n];
    }
    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                for (std::size_t k = 0; k < n_; ++k) t += (*this)(i, j, k, i, j, k);
        return t;
    }
    Rdm3& operator+=(const Rdm3& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Rdm3& operator-=(const Rdm3& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    double norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }
    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    const std::vector<double>& flat() const { return data_; }

  private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// wedge products used by the Hartree-Fock reference and the cumulant

inline Tensor4 wedge_same_spin(const Mat& d) {
    const std::size_t r = d.rows();
    Tensor4 w(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < r; ++l)
                    w(i, j, k, l) = 0.5 * (d(i, k) * d(j, l) - d(i, l) * d(j, k));
    return w;
}

inline Tensor4 wedge_mixed_spin(const Mat& da, const Mat& db) {
    const std::size_t r = da.rows();
    Tensor4 w(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < r; ++l) w(i, j, k, l) = 0.5 * da(i, k) * db(j, l);
    return w;
}

// ---------------------------------------------------------------------------

inline std::pair<Rdm1, Rdm2> hf_reference(const OrbitalSpace& space) {
    space.validate();
    Rdm1 d1(space.r);
    for (std::size_t i = 0; i < space.n_alpha; ++i) d1.a(i, i) = 1.0;
    for (std::size_t i = 0; i < space.n_beta; ++i) d1.b(i, i) = 1.0;
    Rdm2 d2(space.r);
    d2.aa = wedge_same_spin(d1.a);
    d2.ab = wedge_mixed_spin(d1.a, d1.b);
    d2.bb = wedge_same_spin(d1.b);
    return {d1, d2};
}

// 1D_alpha^i_k = [2 sum_j aa^{ij}_{kj} + 2 sum_j ab^{ij}_{kj}] / (N-1), beta
// analogous through bb and the transposed ab block. Closes exactly on
// single-determinant pairs.
inline Rdm1 partial_trace_2to1(const Rdm2& d2, const OrbitalSpace& space) {
    space.require_pair_count();
    const std::size_t r = d2.r();
    if (r != space.r) throw std::invalid_argument("partial_trace_2to1: dimension mismatch");
    const double inv = 1.0 / (static_cast<double>(space.n_electrons()) - 1.0);
    Rdm1 d1(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < r; ++k) {
            double sa = 0.0, sb = 0.0;
            for (std::size_t j = 0; j < r; ++j) {
                sa += d2.aa(i, j, k, j) + d2.ab(i, j, k, j);
                sb += d2.bb(i, j, k, j) + d2.ab(j, i, j, k);
            }
            d1.a(i, k) = 2.0 * sa * inv;
            d1.b(i, k) = 2.0 * sb * inv;
        }
    return d1;
}

inline Cumulant2 cumulant2(const Rdm2& d2, const Rdm1& d1) {
    const std::size_t r = d2.r();
    if (r != d1.r()) throw std::invalid_argument("cumulant2: dimension mismatch");
    Cumulant2 c(r);
    c.aa = d2.aa - wedge_same_spin(d1.a);
    c.ab = d2.ab - wedge_mixed_spin(d1.a, d1.b);
    c.bb = d2.bb - wedge_same_spin(d1.b);
    return c;
}

struct NaturalOccupations {
    std::vector<double> alpha, beta;  // descending
    std::vector<double> spin_summed() const {
        std::vector<double> s(alpha.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = alpha[i] + beta[i];
        return s;
    }
};

inline NaturalOccupations natural_occupations(const Rdm1& d1) {
    constexpr double sym_tol = 1e-8;
    for (const Mat* m : {&d1.a, &d1.b})
        for (std::size_t i = 0; i < m->rows(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (std::abs((*m)(i, j) - (*m)(j, i)) > sym_tol)
                    throw std::invalid_argument("natural_occupations: non-symmetric 1-RDM block");
    NaturalOccupations occ;
    auto ev = sym_eig(d1.a).values;
    occ.alpha.assign(ev.rbegin(), ev.rend());
    ev = sym_eig(d1.b).values;
    occ.beta.assign(ev.rbegin(), ev.rend());
    return occ;
}

// ---------------------------------------------------------------------------
// trace targets (spin block normalizations) and diagnostics

struct Rdm2Traces {
    double aa, ab, bb;
};

inline Rdm2Traces rdm2_trace_targets(const OrbitalSpace& space) {
    const double na = static_cast<double>(space.n_alpha), nb = static_cast<double>(space.n_beta);
    return {na * (na - 1.0) / 2.0, na * nb / 2.0, nb * (nb - 1.0) / 2.0};
}

inline double block_trace(const Tensor4& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) s += t(i, j, i, j);
    return s;
}

inline Rdm2Traces rdm2_traces(const Rdm2& d2) {
    return {block_trace(d2.aa), block_trace(d2.ab), block_trace(d2.bb)};
}

// max |X^{ij}_{kl} - X^{kl}_{ij}| over the three blocks
template <typename Blocked>
inline double hermiticity_defect(const Blocked& x) {
    double m = 0.0;
    for (const Tensor4* t : {&x.aa, &x.ab, &x.bb}) {
        const std::size_t r = t->dim(0);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = 0; l < r; ++l)
                        m = std::max(m, std::abs((*t)(i, j, k, l) - (*t)(k, l, i, j)));
    }
    return m;
}

// max same-spin antisymmetry violation under i<->j and k<->l
template <typename Blocked>
inline double antisymmetry_defect(const Blocked& x) {
    double m = 0.0;
    for (const Tensor4* t : {&x.aa, &x.bb}) {
        const std::size_t r = t->dim(0);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = 0; l < r; ++l) {
                        m = std::max(m, std::abs((*t)(i, j, k, l) + (*t)(j, i, k, l)));
                        m = std::max(m, std::abs((*t)(i, j, k, l) + (*t)(i, j, l, k)));
                    }
    }
    return m;
}

// Projection onto the Hermitian, same-spin-antisymmetric subspace; idempotent.
inline void symmetrize_rdm2(Rdm2& d2) {
    const std::size_t r = d2.r();
    for (Tensor4* t : {&d2.aa, &d2.bb}) {
        Tensor4 p(r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = 0; l < r; ++l)
                        p(i, j, k, l) = 0.25 * ((*t)(i, j, k, l) - (*t)(j, i, k, l) - (*t)(i, j, l, k) +
                                                (*t)(j, i, l, k));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = 0; l < r; ++l)
                        (*t)(i, j, k, l) = 0.5 * (p(i, j, k, l) + p(k, l, i, j));
    }
    Tensor4 h(r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < r; ++l)
                    h(i, j, k, l) = 0.5 * (d2.ab(i, j, k, l) + d2.ab(k, l, i, j));
    d2.ab = h;
}

}  // namespace acse
