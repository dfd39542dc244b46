// acse: ACSE solver command-line driver.
//
//   acse run   --fcidump F [--reference hf|PATH] [--recon v|ny]
//              [--mask propagate|restrict] [--active LIST] [--epsilon X]
//              [--etol X] [--max-iter N] [--trajectory PATH]
//   acse fci   --fcidump F [--states N] [--rdm-out PATH] [--rdm3-out PATH]
//   acse check --rdm PATH --fcidump F
//
// Exit codes: 0 converged / all checks pass, 1 file/format/usage errors,
// 2 increase-triggered stops, 3 iteration cap, 4 oracle size cap,
// 5 failed RDM identities. ACSE_THREADS caps engine parallelism (0 = auto).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "acse/fci.hpp"
#include "acse/fcidump.hpp"
#include "acse/rdm_io.hpp"
#include "acse/solver.hpp"

using namespace acse;

namespace {

// 1-based comma/range strings ("4-7,9") to 0-based orbital indices
std::set<std::size_t> parse_active_list(const std::string& text, std::size_t r) {
    std::set<std::size_t> out;
    std::size_t pos = 0;
    auto parse_num = [&](std::size_t& val) {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) throw std::invalid_argument("bad active-orbital list: '" + text + "'");
        val = static_cast<std::size_t>(std::stoul(text.substr(start, pos - start)));
    };
    while (pos < text.size()) {
        std::size_t lo = 0, hi = 0;
        parse_num(lo);
        hi = lo;
        if (pos < text.size() && text[pos] == '-') {
            ++pos;
            parse_num(hi);
        }
        if (lo < 1 || hi < lo || hi > r)
            throw std::invalid_argument("active orbital out of range in '" + text + "'");
        for (std::size_t v = lo; v <= hi; ++v) out.insert(v - 1);
        if (pos < text.size()) {
            if (text[pos] != ',') throw std::invalid_argument("bad active-orbital list: '" + text + "'");
            ++pos;
        }
    }
    return out;
}

std::pair<OrbitalSpace, IntegralSet> load_fcidump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fcidump_error("cannot open FCIDUMP: " + path);
    return parse_fcidump(in);
}

int cmd_run(const std::string& fcidump_path, const std::string& reference, const std::string& recon,
            const std::string& mask, const std::string& active, double epsilon, double etol,
            long max_iter, const std::string& trajectory_path) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.e_tol = etol;
    cfg.max_iter = static_cast<std::size_t>(max_iter);
    if (recon == "v")
        cfg.recon = ReconstructionKind::Valdemoro;
    else if (recon == "ny")
        cfg.recon = ReconstructionKind::NakatsujiYasuda;
    else
        throw std::invalid_argument("unknown reconstruction '" + recon + "' (expected v or ny)");
    if (mask == "propagate")
        cfg.mask = MaskMode::PropagateActive;
    else if (mask == "restrict")
        cfg.mask = MaskMode::RestrictActive;
    else
        throw std::invalid_argument("unknown mask mode '" + mask + "' (expected propagate or restrict)");
    if (cfg.mask == MaskMode::RestrictActive && active.empty())
        throw std::invalid_argument("--mask restrict requires --active");

    auto [space, ints] = load_fcidump(fcidump_path);
    if (!active.empty()) space.active_set = parse_active_list(active, space.r);

    const ReducedH kh = build_reduced_hamiltonian(ints, space);
    auto [d1, d2] = load_reference(reference, space);

    std::ofstream traj;
    std::function<void(const TrajectoryRecord&)> on_record;
    if (!trajectory_path.empty()) {
        traj.open(trajectory_path);
        if (!traj) throw std::invalid_argument("cannot open trajectory file: " + trajectory_path);
        write_trajectory_header(traj);
        on_record = [&traj](const TrajectoryRecord& rec) { write_trajectory_row(traj, rec); };
    }

    const AcseResult result = solve(kh, std::move(d1), std::move(d2), space, cfg, on_record);

    const auto occ = natural_occupations(result.d1);
    const auto summed = occ.spin_summed();
    const std::size_t n_elec = space.n_electrons();
    const std::size_t hono = (n_elec + 1) / 2 - 1;
    std::printf("final energy       %.12f\n", result.energy);
    std::printf("termination        %s\n", to_string(result.reason));
    std::printf("iterations         %zu\n", result.iterations);
    std::printf("lambda_final       %.12f\n", cfg.epsilon * static_cast<double>(result.iterations));
    if (hono < summed.size()) std::printf("HONO occupation    %.12f\n", summed[hono]);
    if (hono + 1 < summed.size()) std::printf("LUNO occupation    %.12f\n", summed[hono + 1]);

    switch (result.reason) {
        case TerminationReason::EnergyConverged: return 0;
        case TerminationReason::EnergyIncreased:
        case TerminationReason::ResidualIncreased: return 2;
        case TerminationReason::MaxIter: return 3;
    }
    return 3;
}

int cmd_fci(const std::string& fcidump_path, long n_states, const std::string& rdm_out,
            const std::string& rdm3_out) {
    const auto [space, ints] = load_fcidump(fcidump_path);
    std::vector<FciState> states;
    try {
        states = fci_solve(ints, space, static_cast<std::size_t>(n_states));
    } catch (const fci_cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    for (const auto& st : states) std::printf("state %d energy %.12f\n", st.index, st.energy);

    if (!rdm_out.empty()) {
        const DeterminantBasis basis = make_determinant_basis(space);
        RdmFixture fx;
        fx.space = space;
        fx.d1 = rdm1_from_state(basis, states[0]);
        fx.d2 = rdm2_from_state(basis, states[0]);
        std::ofstream out(rdm_out);
        if (!out) throw std::invalid_argument("cannot open RDM output file: " + rdm_out);
        write_rdm_fixture(out, fx, "FCI ground-state RDMs from " + fcidump_path);
    }
    if (!rdm3_out.empty()) {
        if (2 * space.r > Rdm3::max_spin_orbitals) {
            std::cerr << "error: explicit 3-RDM export capped at 12 spin orbitals\n";
            return 4;
        }
        const DeterminantBasis basis = make_determinant_basis(space);
        const Rdm3 d3 = rdm3_from_state(basis, states[0]);
        std::ofstream out(rdm3_out);
        if (!out) throw std::invalid_argument("cannot open 3-RDM output file: " + rdm3_out);
        out << "# spin-orbital 3-RDM (diagnostic export; not ACSE-RDM v1 input)\n";
        out << "norb_so " << 2 * space.r << "\n";
        out << "block 3RDM so\n";
        char buf[160];
        const std::size_t n = 2 * space.r;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        for (std::size_t m = 0; m < n; ++m)
                            for (std::size_t o = 0; o < n; ++o) {
                                const double v = d3(i, j, k, l, m, o);
                                if (v == 0.0) continue;
                                std::snprintf(buf, sizeof buf, "%zu %zu %zu %zu %zu %zu %.17g\n", i + 1,
                                              j + 1, k + 1, l + 1, m + 1, o + 1, v);
                                out << buf;
                            }
    }
    return 0;
}

int cmd_check(const std::string& rdm_path, const std::string& fcidump_path) {
    const auto [space, ints] = load_fcidump(fcidump_path);
    (void)ints;
    std::ifstream in(rdm_path);
    if (!in) throw rdm_io_error("cannot open RDM file: " + rdm_path);
    const RdmFixture fx = read_rdm_fixture(in);
    if (fx.space.r != space.r || fx.space.n_alpha != space.n_alpha || fx.space.n_beta != space.n_beta)
        throw rdm_io_error("RDM fixture does not match the FCIDUMP orbital space");

    const auto checks = validate_rdms(fx);
    bool all_ok = true;
    std::printf("%-34s %-12s %-12s %s\n", "identity", "violation", "tolerance", "status");
    for (const auto& chk : checks) {
        std::printf("%-34s %-12.3e %-12.3e %s\n", chk.name.c_str(), chk.magnitude, chk.tolerance,
                    chk.passed() ? "pass" : "FAIL");
        if (!chk.passed()) all_ok = false;
    }
    return all_ok ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anti-Hermitian contracted Schrodinger equation solver"};
    app.require_subcommand(1);

    std::string fcidump_path, reference = "hf", recon = "v", mask = "propagate", active;
    std::string trajectory_path, rdm_path, rdm_out, rdm3_out;
    double epsilon = 1e-3, etol = 1e-6;
    long max_iter = 10000, n_states = 1;

    auto* run = app.add_subcommand("run", "propagate the ACSE from a reference 2-RDM");
    run->add_option("--fcidump", fcidump_path, "FCIDUMP file with MO integrals")->required();
    run->add_option("--reference", reference, "'hf' or an ACSE-RDM v1 file");
    run->add_option("--recon", recon, "3-RDM reconstruction: v | ny");
    run->add_option("--mask", mask, "active-active residual handling: propagate | restrict");
    run->add_option("--active", active, "active orbitals, 1-based list like 1-6 or 4-7,9");
    run->add_option("--epsilon", epsilon, "Euler step size");
    run->add_option("--etol", etol, "energy-change stopping threshold (Hartree)");
    run->add_option("--max-iter", max_iter, "iteration cap");
    run->add_option("--trajectory", trajectory_path, "write per-iteration CSV here");

    auto* fci = app.add_subcommand("fci", "full CI oracle");
    fci->add_option("--fcidump", fcidump_path, "FCIDUMP file with MO integrals")->required();
    fci->add_option("--states", n_states, "number of eigenstates");
    fci->add_option("--rdm-out", rdm_out, "write ground-state 1-/2-RDMs (ACSE-RDM v1)");
    fci->add_option("--rdm3-out", rdm3_out, "write the ground-state 3-RDM (diagnostic, capped)");

    auto* check = app.add_subcommand("check", "validate an RDM fixture against its FCIDUMP");
    check->add_option("--rdm", rdm_path, "ACSE-RDM v1 file")->required();
    check->add_option("--fcidump", fcidump_path, "FCIDUMP file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        if (run->parsed())
            return cmd_run(fcidump_path, reference, recon, mask, active, epsilon, etol, max_iter,
                           trajectory_path);
        if (fci->parsed()) return cmd_fci(fcidump_path, n_states, rdm_out, rdm3_out);
        if (check->parsed()) return cmd_check(rdm_path, fcidump_path);
    } catch (const fci_cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
