#include <catch2/catch.hpp>
#include <fstream>

#include "acse/fci.hpp"
#include "acse/rdm_io.hpp"
#include "acse/reduced_h.hpp"
#include "acse/solver.hpp"

using namespace acse;

#ifndef ACSE_FIXTURE_DIR
#define ACSE_FIXTURE_DIR "fixtures"
#endif

namespace {

std::pair<OrbitalSpace, IntegralSet> load(const std::string& name) {
    std::ifstream in(std::string(ACSE_FIXTURE_DIR) + "/" + name);
    REQUIRE(in.good());
    return parse_fcidump(in);
}

}  // namespace

TEST_CASE("H2 fixture matches a hand-built 2x2 CI matrix", "[fixtures]") {
    const auto [space, ints] = load("h2_sto3g.fcidump");
    REQUIRE(space.r == 2);
    REQUIRE(space.n_alpha == 1);
    REQUIRE(space.n_beta == 1);

    // Independent oracle: the singlet ground state lives in the 2x2 space
    // {|gg>, |uu>} for symmetry-adapted H2 orbitals:
    //   H11 = 2 h_gg + (gg|gg),  H22 = 2 h_uu + (uu|uu),  H12 = (gu|gu)
    const double h_gg = ints.oneK(0, 0), h_uu = ints.oneK(1, 1);
    const double j_gg = ints.raw_eri(0, 0, 0, 0);     // <gg|gg> = (gg|gg)
    const double j_uu = ints.raw_eri(1, 1, 1, 1);
    const double k_gu = ints.raw_eri(0, 0, 1, 1);     // <gg|uu> = (gu|gu)
    const double h11 = 2.0 * h_gg + j_gg + ints.e_nuc;
    const double h22 = 2.0 * h_uu + j_uu + ints.e_nuc;
    const double avg = 0.5 * (h11 + h22), dif = 0.5 * (h11 - h22);
    const double e_lo = avg - std::sqrt(dif * dif + k_gu * k_gu);

    const auto states = fci_solve(ints, space, 1);
    REQUIRE(states[0].energy == Approx(e_lo).margin(1e-10));
}

TEST_CASE("H2 fixture HF energies agree along both contraction paths", "[fixtures]") {
    const auto [space, ints] = load("h2_sto3g.fcidump");
    const auto [d1, d2] = hf_reference(space);
    const ReducedH kh = build_reduced_hamiltonian(ints, space);
    const double e_k = energy_from_reducedH(kh, d2);
    const double e_raw = energy_from_integrals(ints, d1, d2);
    REQUIRE(e_k == Approx(e_raw).margin(1e-12));
    // RHF total energy of the committed fixture, reproduced from the raw path
    REQUIRE(e_raw == Approx(-1.116684390004).margin(1e-9));
}

TEST_CASE("oracle RDMs of the fixtures match their directly computed 1-RDMs", "[fixtures]") {
    for (const char* name : {"h2_sto3g.fcidump", "h3_sto3g.fcidump"}) {
        const auto [space, ints] = load(name);
        const auto states = fci_solve(ints, space, 1);
        const DeterminantBasis basis = make_determinant_basis(space);
        const Rdm1 d1 = rdm1_from_state(basis, states[0]);
        const Rdm2 d2 = rdm2_from_state(basis, states[0]);
        const Rdm1 traced = partial_trace_2to1(d2, space);
        for (std::size_t i = 0; i < space.r; ++i)
            for (std::size_t j = 0; j < space.r; ++j) {
                REQUIRE(traced.a(i, j) == Approx(d1.a(i, j)).margin(1e-12));
                REQUIRE(traced.b(i, j) == Approx(d1.b(i, j)).margin(1e-12));
            }
    }
}

TEST_CASE("stretched-H2-style correlation: natural occupations in (0,2) summing to 2", "[fixtures]") {
    const auto [space, ints] = load("h2_sto3g.fcidump");
    const auto states = fci_solve(ints, space, 1);
    const DeterminantBasis basis = make_determinant_basis(space);
    const Rdm1 d1 = rdm1_from_state(basis, states[0]);
    const auto occ = natural_occupations(d1);
    const auto summed = occ.spin_summed();
    REQUIRE(summed.size() == 2);
    REQUIRE(summed[0] + summed[1] == Approx(2.0).margin(1e-10));
    REQUIRE(summed[0] > 0.0);
    REQUIRE(summed[0] < 2.0);
    REQUIRE(summed[1] > 0.0);

    // nonzero cumulant compared against direct evaluation
    const Rdm2 d2 = rdm2_from_state(basis, states[0]);
    const Cumulant2 c = cumulant2(d2, d1);
    double tr_c = block_trace(c.aa) + block_trace(c.ab) + block_trace(c.bb);
    const double tr_d2 = block_trace(d2.aa) + block_trace(d2.ab) + block_trace(d2.bb);
    const double tr_wedge = block_trace(wedge_same_spin(d1.a)) + block_trace(wedge_mixed_spin(d1.a, d1.b)) +
                            block_trace(wedge_same_spin(d1.b));
    REQUIRE(tr_c == Approx(tr_d2 - tr_wedge).margin(1e-12));
    REQUIRE(std::abs(tr_c) > 1e-6);
}

TEST_CASE("H6 CASSCF fixture satisfies every trace identity for N = 6", "[fixtures][h6]") {
    std::ifstream in(std::string(ACSE_FIXTURE_DIR) + "/h6_casscf66_r0900.rdm");
    REQUIRE(in.good());
    const RdmFixture fx = read_rdm_fixture(in);
    REQUIRE(fx.space.r == 12);
    REQUIRE(fx.space.n_alpha == 3);
    REQUIRE(fx.space.n_beta == 3);
    for (const auto& chk : validate_rdms(fx)) {
        INFO(chk.name << " violated by " << chk.magnitude);
        REQUIRE(chk.magnitude <= 1e-8);
    }
}
