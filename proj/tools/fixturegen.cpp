// Generates the committed hydrogen-chain fixtures: FCIDUMP files in a
// molecular-orbital basis plus CASSCF reference RDM files for the H6 runs.
// Pipeline: s-type Gaussian integrals -> damped RHF (or core-Hamiltonian
// canonical orbitals for the odd-electron chain) -> for H6 a CASSCF[6,6]
// orbital optimization with a dense CAS-CI kernel and BFGS over the
// active-virtual rotations with central-difference gradients.
//
// Usage: fixturegen <outdir>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "acse/fci.hpp"
#include "acse/fcidump.hpp"
#include "acse/rdm_io.hpp"
#include "acse/sym_eig.hpp"
#include "gto_integrals.hpp"

using namespace acse;
using fixturegen::AoIntegrals;

namespace {

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double av = a(i, k);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += av * b(k, j);
        }
    return c;
}

Mat lowdin_x(const Mat& s) {
    const SymEig es = sym_eig(s);
    const std::size_t n = s.rows();
    Mat x(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                v += es.vectors(k, i) * es.vectors(k, j) / std::sqrt(es.values[k]);
            x(i, j) = v;
        }
    return x;
}

// MO transform of the chemist ERI tensor, one index at a time
Tensor4 transform_eri(const Tensor4& g, const Mat& c) {
    const std::size_t n = c.rows(), m = c.cols();
    Tensor4 t1(m, n, n, n), t2(m, m, n, n), t3(m, m, m, n), t4(m, m, m, m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < n; ++i) s += c(i, p) * g(i, j, k, l);
                    t1(p, j, k, l) = s;
                }
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) s += c(j, q) * t1(p, j, k, l);
                    t2(p, q, k, l) = s;
                }
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
            for (std::size_t u = 0; u < m; ++u)
                for (std::size_t l = 0; l < n; ++l) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < n; ++k) s += c(k, u) * t2(p, q, k, l);
                    t3(p, q, u, l) = s;
                }
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
            for (std::size_t u = 0; u < m; ++u)
                for (std::size_t v = 0; v < m; ++v) {
                    double s = 0.0;
                    for (std::size_t l = 0; l < n; ++l) s += c(l, v) * t3(p, q, u, l);
                    t4(p, q, u, v) = s;
                }
    return t4;
}

// IntegralSet over MOs from AO integrals and coefficients C (columns = MOs)
IntegralSet mo_integrals(const AoIntegrals& ao, const Mat& c) {
    const std::size_t m = c.cols();
    IntegralSet ints;
    ints.e_nuc = ao.e_nuc;
    Mat hcore(ao.t.rows(), ao.t.cols());
    for (std::size_t i = 0; i < hcore.size(); ++i) hcore.data()[i] = ao.t.data()[i] + ao.v.data()[i];
    Mat tmp = matmul(hcore, c);
    ints.oneK = Mat(m, m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < c.rows(); ++i) s += c(i, p) * tmp(i, q);
            ints.oneK(p, q) = s;
        }
    const Tensor4 gmo = transform_eri(ao.eri, c);
    ints.twoV = Tensor4(m);
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
            for (std::size_t u = 0; u < m; ++u)
                for (std::size_t v = 0; v < m; ++v)
                    ints.twoV(p, q, u, v) = 0.5 * gmo(p, u, q, v);  // (1/2)<pq|uv> from (pu|qv)
    return ints;
}

// closed-shell RHF with damping; returns MO coefficients (AO x MO)
Mat rhf_orbitals(const AoIntegrals& ao, std::size_t n_occ_pairs, double& e_scf) {
    const std::size_t n = ao.s.rows();
    const Mat x = lowdin_x(ao.s);
    Mat hcore(n, n);
    for (std::size_t i = 0; i < hcore.size(); ++i) hcore.data()[i] = ao.t.data()[i] + ao.v.data()[i];

    auto diag_in_x = [&](const Mat& f) {
        Mat fx = matmul(matmul(x.transposed(), f), x);
        const SymEig es = sym_eig(fx);
        Mat c(n, n);
        for (std::size_t mo = 0; mo < n; ++mo)
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += x(i, k) * es.vectors(mo, k);
                c(i, mo) = s;
            }
        return c;
    };

    Mat c = diag_in_x(hcore);
    Mat dens(n, n);
    auto density = [&](const Mat& cm) {
        Mat d(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t o = 0; o < n_occ_pairs; ++o) s += cm(i, o) * cm(j, o);
                d(i, j) = 2.0 * s;
            }
        return d;
    };
    dens = density(c);

    const double damp = 0.5;
    double e_prev = 0.0;
    for (int it = 0; it < 2000; ++it) {
        Mat f = hcore;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        s += dens(k, l) * (ao.eri(i, j, k, l) - 0.5 * ao.eri(i, k, j, l));
                f(i, j) += s;
            }
        double e = ao.e_nuc;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) e += 0.5 * dens(i, j) * (hcore(i, j) + f(i, j));
        c = diag_in_x(f);
        Mat dnew = density(c);
        double delta = 0.0;
        for (std::size_t i = 0; i < dens.size(); ++i) {
            delta = std::max(delta, std::abs(dnew.data()[i] - dens.data()[i]));
            dens.data()[i] = damp * dens.data()[i] + (1.0 - damp) * dnew.data()[i];
        }
        if (delta < 1e-11 && std::abs(e - e_prev) < 1e-12) {
            e_scf = e;
            return c;
        }
        e_prev = e;
    }
    std::cerr << "warning: RHF not fully converged; continuing with the last iterate\n";
    e_scf = e_prev;
    return c;
}

// orbitals from the core Hamiltonian (odd-electron chains)
Mat hcore_orbitals(const AoIntegrals& ao) {
    const std::size_t n = ao.s.rows();
    Mat hcore(n, n);
    for (std::size_t i = 0; i < hcore.size(); ++i) hcore.data()[i] = ao.t.data()[i] + ao.v.data()[i];
    const Mat x = lowdin_x(ao.s);
    Mat fx = matmul(matmul(x.transposed(), hcore), x);
    const SymEig es = sym_eig(fx);
    Mat c(n, n);
    for (std::size_t mo = 0; mo < n; ++mo)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += x(i, k) * es.vectors(mo, k);
            c(i, mo) = s;
        }
    return c;
}

std::vector<std::array<double, 3>> chain(std::size_t n_atoms, double spacing_angstrom) {
    std::vector<std::array<double, 3>> at(n_atoms);
    for (std::size_t i = 0; i < n_atoms; ++i)
        at[i] = {0.0, 0.0, static_cast<double>(i) * spacing_angstrom * fixturegen::angstrom_to_bohr};
    return at;
}

// ----------------------------------------------------------------------------
// CASSCF[ne,no] over active-virtual rotations (no core orbitals here)

struct CasResult {
    Mat c;             // optimized MO coefficients
    double e_casscf;   // CAS-CI energy at the optimum
    FciState state;    // CAS-CI ground state in the active orbitals
    OrbitalSpace cas_space;
};

double cas_energy(const AoIntegrals& ao, const Mat& c, std::size_t n_act, std::size_t na, std::size_t nb,
                  FciState* state_out) {
    // active block integrals
    Mat cact(c.rows(), n_act);
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t p = 0; p < n_act; ++p) cact(i, p) = c(i, p);
    const IntegralSet ints = mo_integrals(ao, cact);
    OrbitalSpace s;
    s.r = n_act;
    s.n_alpha = na;
    s.n_beta = nb;
    const DeterminantBasis basis = make_determinant_basis(s);
    const SlaterCondon sc(ints, basis);
    // a 3-root block tolerates the near-degenerate stretched-chain spectrum;
    // fall back to the dense path if the iteration still stalls
    try {
        const auto states = acse::detail::davidson_solve(sc, basis, std::min<std::size_t>(3, basis.size()));
        if (state_out) *state_out = states[0];
        return states[0].energy;
    } catch (const std::exception&) {
        const auto states = fci_solve(ints, s, 1);
        if (state_out) *state_out = states[0];
        return states[0].energy;
    }
}

Mat expm_antisym(const Mat& k) {
    const std::size_t n = k.rows();
    double nrm = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) nrm = std::max(nrm, std::abs(k.data()[i]));
    int squarings = 0;
    double scale = 1.0;
    while (nrm * scale > 0.25) {
        scale *= 0.5;
        ++squarings;
    }
    Mat a(n, n);
    for (std::size_t i = 0; i < k.size(); ++i) a.data()[i] = k.data()[i] * scale;
    Mat result = Mat::identity(n), term = Mat::identity(n);
    for (int order = 1; order <= 24; ++order) {
        term = matmul(term, a);
        for (std::size_t i = 0; i < term.size(); ++i) term.data()[i] /= static_cast<double>(order);
        for (std::size_t i = 0; i < result.size(); ++i) result.data()[i] += term.data()[i];
        double tn = 0.0;
        for (std::size_t i = 0; i < term.size(); ++i) tn = std::max(tn, std::abs(term.data()[i]));
        if (tn < 1e-17) break;
    }
    for (int sq = 0; sq < squarings; ++sq) result = matmul(result, result);
    return result;
}

CasResult casscf(const AoIntegrals& ao, Mat c0, std::size_t n_act, std::size_t na, std::size_t nb) {
    const std::size_t n = c0.cols();
    const std::size_t n_virt = n - n_act;
    const std::size_t np = n_act * n_virt;

    auto orbitals_at = [&](const std::vector<double>& kappa) {
        Mat k(n, n);
        for (std::size_t a = 0; a < n_act; ++a)
            for (std::size_t v = 0; v < n_virt; ++v) {
                k(a, n_act + v) = kappa[a * n_virt + v];
                k(n_act + v, a) = -kappa[a * n_virt + v];
            }
        return matmul(c0, expm_antisym(k));
    };
    auto energy_at = [&](const std::vector<double>& kappa) {
        return cas_energy(ao, orbitals_at(kappa), n_act, na, nb, nullptr);
    };

    std::vector<double> kappa(np, 0.0);
    std::vector<double> grad(np, 0.0), grad_new(np, 0.0);
    std::vector<std::vector<double>> hinv(np, std::vector<double>(np, 0.0));
    for (std::size_t i = 0; i < np; ++i) hinv[i][i] = 1.0;

    const double h = 1e-4;
    auto gradient = [&](const std::vector<double>& at, std::vector<double>& g) {
        std::vector<double> probe = at;
        for (std::size_t i = 0; i < np; ++i) {
            probe[i] = at[i] + h;
            const double ep = energy_at(probe);
            probe[i] = at[i] - h;
            const double em = energy_at(probe);
            probe[i] = at[i];
            g[i] = (ep - em) / (2.0 * h);
        }
    };

    double e = energy_at(kappa);
    gradient(kappa, grad);
    for (int iter = 0; iter < 300; ++iter) {
        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        std::printf("  casscf iter %3d  E = %.12f  |g|max = %.3e\n", iter, e, gmax);
        std::fflush(stdout);
        if (gmax < 2e-7) break;

        std::vector<double> dir(np, 0.0);
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j < np; ++j) dir[i] -= hinv[i][j] * grad[j];
        double g_dot_d = 0.0;
        for (std::size_t i = 0; i < np; ++i) g_dot_d += grad[i] * dir[i];
        if (g_dot_d > 0.0) {  // reset a corrupted Hessian estimate
            for (std::size_t i = 0; i < np; ++i)
                for (std::size_t j = 0; j < np; ++j) hinv[i][j] = (i == j) ? 1.0 : 0.0;
            for (std::size_t i = 0; i < np; ++i) dir[i] = -grad[i];
            g_dot_d = 0.0;
            for (std::size_t i = 0; i < np; ++i) g_dot_d += grad[i] * dir[i];
        }

        double step = 1.0, e_new = 0.0;
        std::vector<double> knew(np);
        for (int ls = 0; ls < 40; ++ls) {
            for (std::size_t i = 0; i < np; ++i) knew[i] = kappa[i] + step * dir[i];
            e_new = energy_at(knew);
            if (e_new <= e + 1e-4 * step * g_dot_d) break;
            step *= 0.5;
        }
        gradient(knew, grad_new);

        // BFGS update of the inverse Hessian
        std::vector<double> sv(np), yv(np);
        for (std::size_t i = 0; i < np; ++i) {
            sv[i] = knew[i] - kappa[i];
            yv[i] = grad_new[i] - grad[i];
        }
        double sy = 0.0;
        for (std::size_t i = 0; i < np; ++i) sy += sv[i] * yv[i];
        if (sy > 1e-14) {
            std::vector<double> hy(np, 0.0);
            for (std::size_t i = 0; i < np; ++i)
                for (std::size_t j = 0; j < np; ++j) hy[i] += hinv[i][j] * yv[j];
            double yhy = 0.0;
            for (std::size_t i = 0; i < np; ++i) yhy += yv[i] * hy[i];
            for (std::size_t i = 0; i < np; ++i)
                for (std::size_t j = 0; j < np; ++j)
                    hinv[i][j] += ((sy + yhy) * sv[i] * sv[j]) / (sy * sy) -
                                  (hy[i] * sv[j] + sv[i] * hy[j]) / sy;
        }
        kappa = knew;
        grad = grad_new;
        e = e_new;
    }

    CasResult out;
    out.c = orbitals_at(kappa);
    FciState st;
    out.e_casscf = cas_energy(ao, out.c, n_act, na, nb, &st);
    out.state = st;
    out.cas_space.r = n_act;
    out.cas_space.n_alpha = na;
    out.cas_space.n_beta = nb;
    return out;
}

void write_fcidump_file(const std::string& path, const OrbitalSpace& space, const IntegralSet& ints) {
    std::ofstream out(path);
    write_fcidump(out, space, ints);
    std::printf("wrote %s\n", path.c_str());
}

void make_simple_chain(const std::string& outdir, const std::string& name, std::size_t n_atoms,
                       double spacing, std::size_t na, std::size_t nb, bool use_rhf) {
    const auto atoms = chain(n_atoms, spacing);
    std::vector<fixturegen::SShell> shells;
    for (const auto& a : atoms) shells.push_back(fixturegen::h_sto3g(a));
    const AoIntegrals ao = fixturegen::compute_integrals(shells, atoms, std::vector<double>(n_atoms, 1.0));
    Mat c;
    if (use_rhf) {
        double e_scf = 0.0;
        c = rhf_orbitals(ao, na, e_scf);
        std::printf("%s: RHF energy %.12f\n", name.c_str(), e_scf);
    } else {
        c = hcore_orbitals(ao);
    }
    const IntegralSet ints = mo_integrals(ao, c);
    OrbitalSpace space;
    space.r = n_atoms;
    space.n_alpha = na;
    space.n_beta = nb;
    write_fcidump_file(outdir + "/" + name + ".fcidump", space, ints);
}

void make_h6(const std::string& outdir, double spacing, const std::string& tag) {
    std::printf("== H6 at %.2f A ==\n", spacing);
    const std::size_t n_atoms = 6, n_act = 6, na = 3, nb = 3;
    const auto atoms = chain(n_atoms, spacing);
    std::vector<fixturegen::SShell> shells;
    for (const auto& a : atoms)
        for (auto& sh : fixturegen::h_631g(a)) shells.push_back(sh);
    const AoIntegrals ao = fixturegen::compute_integrals(shells, atoms, std::vector<double>(n_atoms, 1.0));

    double e_scf = 0.0;
    Mat c0 = rhf_orbitals(ao, 3, e_scf);
    std::printf("H6 %s: RHF energy %.12f\n", tag.c_str(), e_scf);

    const CasResult cas = casscf(ao, c0, n_act, na, nb);
    std::printf("H6 %s: CASSCF[6,6] energy %.12f\n", tag.c_str(), cas.e_casscf);

    const std::size_t r = shells.size();
    OrbitalSpace space;
    space.r = r;
    space.n_alpha = na;
    space.n_beta = nb;
    const IntegralSet ints = mo_integrals(ao, cas.c);
    write_fcidump_file(outdir + "/h6_631g_" + tag + ".fcidump", space, ints);

    // CAS-CI RDMs over the active orbitals, embedded in the full space
    const DeterminantBasis basis = make_determinant_basis(cas.cas_space);
    const Rdm1 d1a = rdm1_from_state(basis, cas.state);
    const Rdm2 d2a = rdm2_from_state(basis, cas.state);
    RdmFixture fx;
    fx.space = space;
    fx.d1 = Rdm1(r);
    fx.d2 = Rdm2(r);
    for (std::size_t i = 0; i < n_act; ++i)
        for (std::size_t j = 0; j < n_act; ++j) {
            fx.d1.a(i, j) = d1a.a(i, j);
            fx.d1.b(i, j) = d1a.b(i, j);
        }
    for (std::size_t i = 0; i < n_act; ++i)
        for (std::size_t j = 0; j < n_act; ++j)
            for (std::size_t k = 0; k < n_act; ++k)
                for (std::size_t l = 0; l < n_act; ++l) {
                    fx.d2.aa(i, j, k, l) = d2a.aa(i, j, k, l);
                    fx.d2.ab(i, j, k, l) = d2a.ab(i, j, k, l);
                    fx.d2.bb(i, j, k, l) = d2a.bb(i, j, k, l);
                }
    char prov[256];
    std::snprintf(prov, sizeof prov,
                  "linear H6, 6-31G, R = %.2f A; CASSCF[6,6] reference (in-repo fixturegen); "
                  "E_CASSCF = %.12f",
                  spacing, cas.e_casscf);
    std::ofstream out(outdir + "/h6_casscf66_" + tag + ".rdm");
    write_rdm_fixture(out, fx, prov);
    std::printf("wrote %s\n", (outdir + "/h6_casscf66_" + tag + ".rdm").c_str());
}

}  // namespace

int main(int argc, char** argv) {
    const std::string outdir = argc > 1 ? argv[1] : "fixtures";
    const std::string only = argc > 2 ? argv[2] : "";
    std::filesystem::create_directories(outdir);
    auto wanted = [&](const std::string& name) { return only.empty() || only == name; };
    if (wanted("h2")) make_simple_chain(outdir, "h2_sto3g", 2, 0.7414, 1, 1, true);
    if (wanted("h3")) make_simple_chain(outdir, "h3_sto3g", 3, 0.9, 2, 1, false);
    if (wanted("h4")) make_simple_chain(outdir, "h4_sto3g", 4, 0.9, 2, 2, true);
    if (wanted("h6a")) make_h6(outdir, 0.9, "r0900");
    if (wanted("h6b")) make_h6(outdir, 5.0, "r5000");
    return 0;
}
