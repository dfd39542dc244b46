// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails. Expects the committed fixtures; paths are baked in via
// ACSE_FIXTURE_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "acse/fci.hpp"
#include "acse/fcidump.hpp"
#include "acse/rdm_io.hpp"
#include "acse/residual.hpp"
#include "acse/solver.hpp"
#include "support/naive_so_engine.hpp"
#include "support/random_instances.hpp"

#ifndef ACSE_FIXTURE_DIR
#define ACSE_FIXTURE_DIR "fixtures"
#endif

using namespace acse;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("criterion %d: %s  (%s)\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::pair<OrbitalSpace, IntegralSet> load_fixture(const std::string& name) {
    std::ifstream in(std::string(ACSE_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture: " + name);
    return parse_fcidump(in);
}

double blocked_max_diff(const ResidualTensor& a, const ResidualTensor& b) {
    double m = 0.0;
    for (auto [x, y] : {std::pair{&a.aa, &b.aa}, {&a.ab, &b.ab}, {&a.bb, &b.bb}})
        for (std::size_t i = 0; i < x->size(); ++i) m = std::max(m, std::abs(x->data()[i] - y->data()[i]));
    return m;
}

Rdm3 reconstructed_d3(const Rdm2& d2, const Rdm1& d1, ReconstructionKind kind, const OccupationSignature* sig) {
    const Cumulant2 c = cumulant2(d2, d1);
    Rdm3 d3 = reconstruct_3rdm_valdemoro(build_M(c, d1), d1);
    if (kind == ReconstructionKind::NakatsujiYasuda) d3 += ny_cumulant3(c, *sig);
    return d3;
}

// --- criterion 1: eigenstate nullity on the committed fixtures -------------

void criterion_1() {
    double worst = 0.0;
    std::string worst_at = "-";
    for (const char* name : {"h2_sto3g.fcidump", "h3_sto3g.fcidump", "h4_sto3g.fcidump"}) {
        const auto [space, ints] = load_fixture(name);
        const ReducedH kh = build_reduced_hamiltonian(ints, space);
        const auto states = fci_solve(ints, space, 2);
        const DeterminantBasis basis = make_determinant_basis(space);
        for (const auto& st : states) {
            const Rdm2 d2 = rdm2_from_state(basis, st);
            const Rdm3 d3 = rdm3_from_state(basis, st);
            const double nrm = residual_norm(residual_exact(kh, d2, d3));
            if (nrm > worst) {
                worst = nrm;
                worst_at = std::string(name) + " state " + std::to_string(st.index);
            }
        }
    }
    std::ostringstream os;
    os << "max ||R|| over ground+excited of H2/H3/H4 = " << worst << " at " << worst_at
       << ", threshold 1e-9";
    report(1, worst <= 1e-9, os.str());
}

// --- criterion 2: contracted/explicit equivalence ---------------------------

void criterion_2() {
    std::mt19937 rng(2025);
    double worst = 0.0;
    int instances = 0;
    for (int inst = 0; inst < 52; ++inst) {
        const std::size_t r = 3;
        const std::size_t na = 1 + inst % 2, nb = 1 + (inst / 2) % 2;
        const IntegralSet ints = testing::random_integrals(r, rng);
        OrbitalSpace s;
        s.r = r;
        s.n_alpha = na;
        s.n_beta = nb;
        auto set = testing::random_rdm_set(r, na, nb, rng);
        const ReducedH kh = build_reduced_hamiltonian(ints, s);
        const OccupationSignature sig = OccupationSignature::aufbau(s);
        for (ReconstructionKind kind : {ReconstructionKind::Valdemoro, ReconstructionKind::NakatsujiYasuda}) {
            const Rdm3 d3 = reconstructed_d3(set.d2, set.d1, kind, &sig);
            const ResidualTensor exact = residual_exact(kh, set.d2, d3);
            const ResidualTensor contr = residual_contracted(kh, set.d2, set.d1, kind, &sig);
            worst = std::max(worst, blocked_max_diff(exact, contr));
        }
        ++instances;
    }
    std::ostringstream os;
    os << instances << " random r=3 RDM sets, V and NY, max elementwise diff " << worst
       << ", threshold 1e-12";
    report(2, instances >= 50 && worst <= 1e-12, os.str());
}

// --- criterion 3: update correctness ----------------------------------------

void criterion_3() {
    // oracle comparison on the H2 fixture at the HF reference (reconstruction
    // exact on determinants)
    const auto [space, ints] = load_fixture("h2_sto3g.fcidump");
    const ReducedH kh = build_reduced_hamiltonian(ints, space);
    const auto [d1, d2] = hf_reference(space);
    const ResidualTensor res = residual_contracted(kh, d2, d1, ReconstructionKind::Valdemoro);
    const UpdateTensor upd = update_contracted(res, d2, d1, ReconstructionKind::Valdemoro);

    const DeterminantBasis basis = make_determinant_basis(space);
    FciState hf;
    hf.coeff.assign(basis.size(), 0.0);
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < space.n_alpha; ++i) mask |= 1ull << i;
    for (std::size_t i = 0; i < space.n_beta; ++i) mask |= 1ull << (i + space.r);
    hf.coeff[static_cast<std::size_t>(basis.index_of(mask))] = 1.0;

    const auto op_psi = apply_two_body(basis, blocks_to_so(res), hf.coeff);
    const Tensor4 uso = blocks_to_so(upd);
    double worst = 0.0;
    const std::size_t n = 2 * space.r;
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j)
            for (unsigned k = 0; k < n; ++k)
                for (unsigned l = 0; l < n; ++l)
                    worst = std::max(std::abs(commutator_expectation(basis, hf, i, j, l, k, op_psi, -1) -
                                              uso(i, j, k, l)),
                                     worst);

    // invariants on random correlated inputs
    std::mt19937 rng(303);
    double herm = 0.0, trace = 0.0;
    for (int inst = 0; inst < 8; ++inst) {
        auto set = testing::random_rdm_set(3, 2, 1 + inst % 2, rng);
        const IntegralSet rints = testing::random_integrals(3, rng);
        OrbitalSpace rs;
        rs.r = 3;
        rs.n_alpha = 2;
        rs.n_beta = 1 + inst % 2;
        const ReducedH rkh = build_reduced_hamiltonian(rints, rs);
        const OccupationSignature sig = OccupationSignature::aufbau(rs);
        for (ReconstructionKind kind : {ReconstructionKind::Valdemoro, ReconstructionKind::NakatsujiYasuda}) {
            const ResidualTensor rr = residual_contracted(rkh, set.d2, set.d1, kind, &sig);
            const UpdateTensor uu = update_contracted(rr, set.d2, set.d1, kind, &sig);
            herm = std::max(herm, hermiticity_defect(uu));
            trace = std::max(trace, std::abs(uu.trace()));
        }
    }
    std::ostringstream os;
    os << "oracle commutator diff " << worst << " (<=1e-9), hermiticity " << herm << ", |trace| " << trace
       << " (<=1e-10)";
    report(3, worst <= 1e-9 && herm <= 1e-10 && trace <= 1e-10, os.str());
}

// --- criterion 4: spin-block vs spin-orbital engine -------------------------

void criterion_4() {
    std::mt19937 rng(404);
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t r = 3;
        const std::size_t na = 1 + inst % 2, nb = 1 + (inst / 2) % 2;
        const IntegralSet ints = testing::random_integrals(r, rng);
        OrbitalSpace s;
        s.r = r;
        s.n_alpha = na;
        s.n_beta = nb;
        auto set = testing::random_rdm_set(r, na, nb, rng);
        const ReducedH kh = build_reduced_hamiltonian(ints, s);
        const OccupationSignature sig = OccupationSignature::aufbau(s);
        std::vector<int> sig_so(2 * r);
        for (std::size_t a = 0; a < 2 * r; ++a) sig_so[a] = sig.so(a, r);
        for (ReconstructionKind kind : {ReconstructionKind::Valdemoro, ReconstructionKind::NakatsujiYasuda}) {
            const ResidualTensor blocked = residual_contracted(kh, set.d2, set.d1, kind, &sig);
            const Tensor4 naive = testing::naive_so_contracted(kernel_to_so(kh.twoK), blocks_to_so(set.d2),
                                                               d1_to_so(set.d1), kind, sig_so, +1);
            worst = std::max(worst, blocked_max_diff(blocked, so_to_blocks<ResidualTensor>(naive)));
        }
    }
    std::ostringstream os;
    os << "20 random spin-consistent instances at r=3, max diff " << worst << ", threshold 1e-10";
    report(4, worst <= 1e-10, os.str());
}

// --- criterion 5: Table I reproduction at desk scale ------------------------

void criterion_5() {
    struct Point {
        const char* fcidump;
        const char* rdm;
        double target_mh;
        double tol_mh;
    };
    const Point points[] = {
        {"h6_631g_r0900.fcidump", "h6_casscf66_r0900.rdm", -0.62, 0.20},
        {"h6_631g_r5000.fcidump", "h6_casscf66_r5000.rdm", 0.00, 0.05},
    };
    for (int p = 0; p < 2; ++p) {
        const auto [space0, ints] = load_fixture(points[p].fcidump);
        OrbitalSpace space = space0;
        space.active_set = {0, 1, 2, 3, 4, 5};
        const ReducedH kh = build_reduced_hamiltonian(ints, space);

        const auto t0 = std::chrono::steady_clock::now();
        const auto states = fci_solve(ints, space, 1);
        const double e_fci = states[0].energy;

        auto [d1, d2] = load_reference(std::string(ACSE_FIXTURE_DIR) + "/" + points[p].rdm, space);
        SolverConfig cfg;
        cfg.recon = ReconstructionKind::Valdemoro;
        cfg.mask = MaskMode::RestrictActive;
        cfg.epsilon = 1e-3;
        const AcseResult res = solve(kh, std::move(d1), std::move(d2), space, cfg);
        const auto t1 = std::chrono::steady_clock::now();

        const double err_mh = (res.energy - e_fci) * 1000.0;
        const double dev = std::abs(err_mh - points[p].target_mh);
        std::ostringstream os;
        os << points[p].fcidump << ": E_FCI " << std::setprecision(10) << std::fixed << e_fci << ", E_ACSE "
           << res.energy << ", error " << std::setprecision(3) << err_mh << " mH vs " << points[p].target_mh
           << " +/- " << points[p].tol_mh << " mH [" << to_string(res.reason) << ", n=" << res.iterations
           << ", " << std::chrono::duration_cast<std::chrono::seconds>(t1 - t0).count() << " s]";
        report(5, dev <= points[p].tol_mh, os.str());
    }
}

// --- criteria 6-8: H4 HF-start run ------------------------------------------

void criteria_6_7_8() {
    const auto [space, ints] = load_fixture("h4_sto3g.fcidump");
    const ReducedH kh = build_reduced_hamiltonian(ints, space);
    const auto states = fci_solve(ints, space, 1);
    const double e_fci = states[0].energy;

    auto [d1h, d2h] = hf_reference(space);
    const double e_hf = energy_from_reducedH(kh, d2h);

    // criterion 6 run: defaults
    std::ostringstream csv;
    SolverConfig cfg;
    write_trajectory_header(csv);
    const AcseResult res = solve(kh, d1h, d2h, space, cfg,
                                 [&csv](const TrajectoryRecord& rec) { write_trajectory_row(csv, rec); });
    {
        std::ostringstream os;
        os << "E_HF " << std::setprecision(10) << std::fixed << e_hf << ", E_ACSE(V) " << res.energy
           << ", E_FCI " << e_fci << " [" << to_string(res.reason) << ", n=" << res.iterations << "]";
        report(6, res.energy < e_hf && std::abs(res.energy - e_fci) < std::abs(e_hf - e_fci), os.str());
    }

    // criterion 7: trajectory diagnostics + golden file
    {
        bool lambda_exact = true, rho_monotone = true;
        for (const auto& rec : res.trajectory) {
            if (rec.lambda != cfg.epsilon * static_cast<double>(rec.n)) lambda_exact = false;
            if (rec.n >= 1 && rec.n <= 100 && rec.n < res.trajectory.size())
                if (res.trajectory[rec.n].residual_norm > res.trajectory[rec.n - 1].residual_norm)
                    rho_monotone = false;
        }
        // golden-file match: header must be byte-identical, numeric fields
        // must agree to 1e-12 relative
        bool golden_ok = true;
        std::string golden_note;
        std::ifstream gold(std::string(ACSE_FIXTURE_DIR) + "/golden_h4_hf_v_head.csv");
        if (!gold) {
            golden_ok = false;
            golden_note = " golden file missing";
        } else {
            std::istringstream mine(csv.str());
            std::string gline, mline;
            std::getline(gold, gline);
            std::getline(mine, mline);
            if (gline != mline) golden_ok = false;
            int row = 0;
            while (std::getline(gold, gline) && std::getline(mine, mline) && row < 32) {
                ++row;
                long gn, mn;
                double gl, ge, gr, ml, me, mr;
                if (std::sscanf(gline.c_str(), "%ld,%lf,%lf,%lf", &gn, &gl, &ge, &gr) != 4 ||
                    std::sscanf(mline.c_str(), "%ld,%lf,%lf,%lf", &mn, &ml, &me, &mr) != 4) {
                    golden_ok = false;
                    break;
                }
                auto close = [](double a, double b) {
                    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
                };
                if (gn != mn || gl != ml || !close(ge, me) || !close(gr, mr)) {
                    golden_ok = false;
                    golden_note = " golden mismatch at row " + std::to_string(row);
                    break;
                }
            }
        }
        std::ostringstream os;
        os << "lambda exact: " << (lambda_exact ? "yes" : "no")
           << ", residual non-increasing over first 100 iterations: " << (rho_monotone ? "yes" : "no")
           << ", golden CSV: " << (golden_ok ? "match" : "MISMATCH") << golden_note;
        report(7, lambda_exact && rho_monotone && golden_ok, os.str());
    }

    // criterion 8: conservation across 1000 Euler steps of the criterion-6
    // configuration. The run itself stops earlier on its own criteria (the
    // residual bottoms out), so the step machinery is driven directly here.
    {
        auto [d1c, d2c] = hf_reference(space);
        const auto tgt = rdm2_trace_targets(space);
        double drift = 0.0, herm = 0.0, anti = 0.0;
        for (int n = 1; n <= 1000; ++n) {
            const ResidualTensor rr =
                residual_contracted(kh, d2c, d1c, ReconstructionKind::Valdemoro);
            const UpdateTensor uu = update_contracted(rr, d2c, d1c, ReconstructionKind::Valdemoro);
            for (std::size_t x = 0; x < d2c.aa.size(); ++x) {
                d2c.aa.data()[x] += 1e-3 * uu.aa.data()[x];
                d2c.ab.data()[x] += 1e-3 * uu.ab.data()[x];
                d2c.bb.data()[x] += 1e-3 * uu.bb.data()[x];
            }
            symmetrize_rdm2(d2c);
            d1c = partial_trace_2to1(d2c, space);
            if (n % 100 == 0 || n == 1000) {
                const auto tr = rdm2_traces(d2c);
                drift = std::max({drift, std::abs(tr.aa - tgt.aa), std::abs(tr.ab - tgt.ab),
                                  std::abs(tr.bb - tgt.bb)});
                herm = std::max(herm, hermiticity_defect(d2c));
                anti = std::max(anti, antisymmetry_defect(d2c));
            }
        }
        std::ostringstream os;
        os << "1000 steps, max trace drift " << drift << " (<=1e-8), hermiticity " << herm
           << ", antisymmetry " << anti << " (<=1e-10)";
        report(8, drift <= 1e-8 && herm <= 1e-10 && anti <= 1e-10, os.str());
    }
}

// --- criterion 9: stopping behavior ------------------------------------------

void criterion_9() {
    // (a) a seed that satisfies the criterion's premise exactly: the FCI state
    // of the spin-aligned sector is a determinant, the reconstruction is exact
    // there, and the contracted residual vanishes
    bool a_ok = false;
    std::string a_note;
    {
        const auto [space0, ints] = load_fixture("h2_sto3g.fcidump");
        OrbitalSpace space = space0;
        space.n_alpha = 2;
        space.n_beta = 0;
        const ReducedH kh = build_reduced_hamiltonian(ints, space);
        const auto states = fci_solve(ints, space, 1);
        const DeterminantBasis basis = make_determinant_basis(space);
        Rdm1 d1 = rdm1_from_state(basis, states[0]);
        Rdm2 d2 = rdm2_from_state(basis, states[0]);
        SolverConfig cfg;
        const AcseResult res = solve(kh, d1, d2, space, cfg);
        a_ok = res.reason == TerminationReason::EnergyConverged && res.iterations <= 1 &&
               std::abs(res.energy - states[0].energy) <= 1e-8;
        a_note = "FCI-seeded: " + std::string(to_string(res.reason)) + " after " +
                 std::to_string(res.iterations) + " iterations, |dE| = " +
                 std::to_string(std::abs(res.energy - states[0].energy));
        // correlated singlet seed, for the record: converges after a short
        // reconstruction-bias drift (not part of the pass/fail decision here,
        // but it must terminate cleanly)
        OrbitalSpace sing = space0;
        const ReducedH khs = build_reduced_hamiltonian(ints, sing);
        const auto sstates = fci_solve(ints, sing, 1);
        const DeterminantBasis sbasis = make_determinant_basis(sing);
        Rdm1 sd1 = rdm1_from_state(sbasis, sstates[0]);
        Rdm2 sd2 = rdm2_from_state(sbasis, sstates[0]);
        const AcseResult sres = solve(khs, sd1, sd2, sing, cfg);
        a_note += "; correlated-singlet seed: " + std::string(to_string(sres.reason)) + " after " +
                  std::to_string(sres.iterations) + " iterations";
        a_ok = a_ok && (sres.reason == TerminationReason::EnergyConverged ||
                        sres.reason == TerminationReason::ResidualIncreased);
    }

    // (b) adversarial overshoot returns the previous iterate
    bool b_ok = false;
    std::string b_note;
    {
        const auto [space, ints] = load_fixture("h4_sto3g.fcidump");
        const ReducedH kh = build_reduced_hamiltonian(ints, space);
        auto [d1, d2] = hf_reference(space);
        SolverConfig cfg;
        cfg.epsilon = 5.0;
        cfg.e_tol = 1e-300;
        cfg.max_iter = 50;
        const AcseResult res = solve(kh, std::move(d1), std::move(d2), space, cfg);
        const bool increase = res.reason == TerminationReason::EnergyIncreased ||
                              res.reason == TerminationReason::ResidualIncreased;
        const bool prev = res.iterations == res.trajectory.size() - 2 &&
                          res.energy == res.trajectory[res.iterations].energy;
        b_ok = increase && prev;
        b_note = "overshoot: " + std::string(to_string(res.reason)) + ", returned iterate " +
                 std::to_string(res.iterations) + " of " + std::to_string(res.trajectory.size() - 1);
    }
    report(9, a_ok && b_ok, a_note + "; " + b_note);
}

}  // namespace

int main() {
    try {
        criterion_1();
        criterion_2();
        criterion_3();
        criterion_4();
        criterion_5();
        criteria_6_7_8();
        criterion_9();
    } catch (const std::exception& e) {
        std::printf("acceptance suite aborted: %s\n", e.what());
        return 64;
    }
    std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "SOME CRITERIA FAILED");
    return g_failures == 0 ? 0 : 1;
}
