#pragma once

// Minimal s-type contracted-Gaussian integral engine for hydrogen-chain
// fixture generation. Only s functions are supported, which covers STO-3G and
// 6-31G hydrogens. Not part of the solver library: integrals normally arrive
// via FCIDUMP.

#include <array>
#include <cmath>
#include <vector>

#include "acse/tensor.hpp"

namespace fixturegen {

constexpr double angstrom_to_bohr = 1.8897259886;

struct SShell {
    std::array<double, 3> center{0, 0, 0};
    std::vector<double> exps;
    std::vector<double> coeffs;  // contraction coefficients over normalized primitives
};

inline double prim_norm(double a) { return std::pow(2.0 * a / M_PI, 0.75); }

inline double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

inline double boys_f0(double t) {
    if (t < 1e-12) return 1.0 - t / 3.0;
    return 0.5 * std::sqrt(M_PI / t) * std::erf(std::sqrt(t));
}

// H basis sets (exponents/coefficients as published; shells renormalized below)
inline SShell h_sto3g(const std::array<double, 3>& at) {
    return {at, {3.42525091, 0.62391373, 0.16885540}, {0.15432897, 0.53532814, 0.44463454}};
}
inline std::vector<SShell> h_631g(const std::array<double, 3>& at) {
    return {{at, {18.7311370, 2.8253937, 0.6401217}, {0.03349460, 0.23472695, 0.81375733}},
            {at, {0.1612778}, {1.0}}};
}

struct AoIntegrals {
    acse::Mat s, t, v;    // overlap, kinetic, nuclear attraction
    acse::Tensor4 eri;    // chemist (ij|kl)
    double e_nuc = 0.0;
};

inline double overlap_prim(double a, double b, double r2) {
    const double p = a + b;
    return std::pow(M_PI / p, 1.5) * std::exp(-a * b / p * r2);
}

inline AoIntegrals compute_integrals(std::vector<SShell> shells,
                                     const std::vector<std::array<double, 3>>& nuclei,
                                     const std::vector<double>& charges) {
    using acse::Mat;
    using acse::Tensor4;
    const std::size_t n = shells.size();

    // renormalize each contracted shell
    for (auto& sh : shells) {
        double s = 0.0;
        for (std::size_t i = 0; i < sh.exps.size(); ++i)
            for (std::size_t j = 0; j < sh.exps.size(); ++j)
                s += sh.coeffs[i] * sh.coeffs[j] * prim_norm(sh.exps[i]) * prim_norm(sh.exps[j]) *
                     overlap_prim(sh.exps[i], sh.exps[j], 0.0);
        const double scale = 1.0 / std::sqrt(s);
        for (auto& c : sh.coeffs) c *= scale;
    }

    AoIntegrals out;
    out.s = Mat(n, n);
    out.t = Mat(n, n);
    out.v = Mat(n, n);
    out.eri = Tensor4(n);

    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            const double r2 = dist2(shells[a].center, shells[b].center);
            double sv = 0.0, tv = 0.0, vv = 0.0;
            for (std::size_t i = 0; i < shells[a].exps.size(); ++i)
                for (std::size_t j = 0; j < shells[b].exps.size(); ++j) {
                    const double alpha = shells[a].exps[i], beta = shells[b].exps[j];
                    const double cc = shells[a].coeffs[i] * shells[b].coeffs[j] * prim_norm(alpha) *
                                      prim_norm(beta);
                    const double p = alpha + beta, mu = alpha * beta / p;
                    const double sp = overlap_prim(alpha, beta, r2);
                    sv += cc * sp;
                    tv += cc * mu * (3.0 - 2.0 * mu * r2) * sp;
                    std::array<double, 3> pc{};
                    for (int x = 0; x < 3; ++x)
                        pc[x] = (alpha * shells[a].center[x] + beta * shells[b].center[x]) / p;
                    for (std::size_t c = 0; c < nuclei.size(); ++c) {
                        const double t2 = p * dist2(pc, nuclei[c]);
                        vv -= charges[c] * cc * 2.0 * M_PI / p * std::exp(-mu * r2) * boys_f0(t2);
                    }
                }
            out.s(a, b) = out.s(b, a) = sv;
            out.t(a, b) = out.t(b, a) = tv;
            out.v(a, b) = out.v(b, a) = vv;
        }

    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b)
            for (std::size_t c = 0; c <= a; ++c)
                for (std::size_t d = 0; d <= c; ++d) {
                    if (a * (a + 1) / 2 + b < c * (c + 1) / 2 + d) continue;
                    const double rab = dist2(shells[a].center, shells[b].center);
                    const double rcd = dist2(shells[c].center, shells[d].center);
                    double val = 0.0;
                    for (std::size_t i = 0; i < shells[a].exps.size(); ++i)
                        for (std::size_t j = 0; j < shells[b].exps.size(); ++j)
                            for (std::size_t k = 0; k < shells[c].exps.size(); ++k)
                                for (std::size_t l = 0; l < shells[d].exps.size(); ++l) {
                                    const double a1 = shells[a].exps[i], a2 = shells[b].exps[j];
                                    const double a3 = shells[c].exps[k], a4 = shells[d].exps[l];
                                    const double cc = shells[a].coeffs[i] * shells[b].coeffs[j] *
                                                      shells[c].coeffs[k] * shells[d].coeffs[l] *
                                                      prim_norm(a1) * prim_norm(a2) * prim_norm(a3) *
                                                      prim_norm(a4);
                                    const double p = a1 + a2, q = a3 + a4;
                                    std::array<double, 3> pp{}, qq{};
                                    for (int x = 0; x < 3; ++x) {
                                        pp[x] = (a1 * shells[a].center[x] + a2 * shells[b].center[x]) / p;
                                        qq[x] = (a3 * shells[c].center[x] + a4 * shells[d].center[x]) / q;
                                    }
                                    const double rho = p * q / (p + q);
                                    val += cc * 2.0 * std::pow(M_PI, 2.5) /
                                           (p * q * std::sqrt(p + q)) *
                                           std::exp(-a1 * a2 / p * rab - a3 * a4 / q * rcd) *
                                           boys_f0(rho * dist2(pp, qq));
                                }
                    const std::size_t im[8][4] = {{a, b, c, d}, {b, a, c, d}, {a, b, d, c}, {b, a, d, c},
                                                  {c, d, a, b}, {d, c, a, b}, {c, d, b, a}, {d, c, b, a}};
                    for (const auto& m : im) out.eri(m[0], m[1], m[2], m[3]) = val;
                }

    for (std::size_t i = 0; i < nuclei.size(); ++i)
        for (std::size_t j = i + 1; j < nuclei.size(); ++j)
            out.e_nuc += charges[i] * charges[j] / std::sqrt(dist2(nuclei[i], nuclei[j]));
    return out;
}

}  // namespace fixturegen
