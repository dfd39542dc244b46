#pragma once

// "ACSE-RDM v1" text fixture format:
//   norb R
//   nelec NA NB
//   block <1RDM|2RDM> <a|b|aa|ab|bb>
//   i j value          (1RDM entries, 1-based)
//   i j k l value      (2RDM entries, 1-based)
// Omitted entries are zero; symmetry-equivalent entries may be given once and
// are expanded on load; unknown lines are errors.

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "acse/orbital_space.hpp"
#include "acse/rdm.hpp"

namespace acse {

class rdm_io_error : public std::runtime_error {
  public:
    explicit rdm_io_error(const std::string& m) : std::runtime_error(m) {}
};

struct RdmFixture {
    OrbitalSpace space;  // r, n_alpha, n_beta (active set not stored)
    Rdm1 d1;
    Rdm2 d2;
};

inline RdmFixture read_rdm_fixture(std::istream& in) {
    RdmFixture fx;
    std::string line;
    std::size_t line_no = 0;
    enum class Target { none, d1a, d1b, d2aa, d2ab, d2bb } target = Target::none;
    bool have_norb = false, have_nelec = false;
    constexpr double dup_tol = 1e-12;

    auto fail = [&](const std::string& msg) {
        throw rdm_io_error("ACSE-RDM line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "#") continue;  // comment lines start with "# "
        if (tok == "norb") {
            long r = -1;
            if (!(ls >> r) || r <= 0) fail("bad norb");
            fx.space.r = static_cast<std::size_t>(r);
            fx.d1 = Rdm1(fx.space.r);
            fx.d2 = Rdm2(fx.space.r);
            have_norb = true;
            continue;
        }
        if (tok == "nelec") {
            long na = -1, nb = -1;
            if (!(ls >> na >> nb) || na < 0 || nb < 0) fail("bad nelec");
            fx.space.n_alpha = static_cast<std::size_t>(na);
            fx.space.n_beta = static_cast<std::size_t>(nb);
            have_nelec = true;
            continue;
        }
        if (tok == "block") {
            std::string order, blk;
            if (!(ls >> order >> blk)) fail("malformed block header");
            if (!have_norb) fail("block before norb");
            if (order == "1RDM" && blk == "a")
                target = Target::d1a;
            else if (order == "1RDM" && blk == "b")
                target = Target::d1b;
            else if (order == "2RDM" && blk == "aa")
                target = Target::d2aa;
            else if (order == "2RDM" && blk == "ab")
                target = Target::d2ab;
            else if (order == "2RDM" && blk == "bb")
                target = Target::d2bb;
            else
                fail("unknown block '" + order + " " + blk + "'");
            continue;
        }
        // data line
        if (target == Target::none) fail("data before any block header");
        std::istringstream ds(line);
        const std::size_t r = fx.space.r;
        if (target == Target::d1a || target == Target::d1b) {
            long i, j;
            double v;
            if (!(ds >> i >> j >> v)) fail("expected 'i j value'");
            std::string extra;
            if (ds >> extra) fail("trailing tokens");
            if (i < 1 || j < 1 || i > static_cast<long>(r) || j > static_cast<long>(r)) fail("index out of range");
            Mat& m = (target == Target::d1a) ? fx.d1.a : fx.d1.b;
            const std::size_t a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
            if (m(a, b) != 0.0 && std::abs(m(a, b) - v) > dup_tol) fail("conflicting duplicate entry");
            m(a, b) = v;
            m(b, a) = v;
        } else {
            long i, j, k, l;
            double v;
            if (!(ds >> i >> j >> k >> l >> v)) fail("expected 'i j k l value'");
            std::string extra;
            if (ds >> extra) fail("trailing tokens");
            for (long x : {i, j, k, l})
                if (x < 1 || x > static_cast<long>(r)) fail("index out of range");
            const std::size_t a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
            const std::size_t c = static_cast<std::size_t>(k - 1), d = static_cast<std::size_t>(l - 1);
            Tensor4* t = target == Target::d2aa ? &fx.d2.aa : target == Target::d2ab ? &fx.d2.ab : &fx.d2.bb;
            auto put = [&](std::size_t p, std::size_t q, std::size_t u, std::size_t w, double val) {
                if ((*t)(p, q, u, w) != 0.0 && std::abs((*t)(p, q, u, w) - val) > dup_tol)
                    fail("conflicting duplicate entry");
                (*t)(p, q, u, w) = val;
            };
            if (target == Target::d2ab) {
                put(a, b, c, d, v);
                put(c, d, a, b, v);
            } else {
                put(a, b, c, d, v);
                put(b, a, c, d, -v);
                put(a, b, d, c, -v);
                put(b, a, d, c, v);
                put(c, d, a, b, v);
                put(d, c, a, b, -v);
                put(c, d, b, a, -v);
                put(d, c, b, a, v);
            }
        }
    }
    if (!have_norb || !have_nelec) throw rdm_io_error("ACSE-RDM: missing norb/nelec header");
    return fx;
}

inline void write_rdm_fixture(std::ostream& out, const RdmFixture& fx, const std::string& provenance = "") {
    const std::size_t r = fx.space.r;
    if (!provenance.empty()) out << "# " << provenance << "\n";
    out << "norb " << r << "\n";
    out << "nelec " << fx.space.n_alpha << " " << fx.space.n_beta << "\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto write1 = [&](const Mat& m, const char* name) {
        out << "block 1RDM " << name << "\n";
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i; j < r; ++j)
                if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << num(m(i, j)) << "\n";
    };
    write1(fx.d1.a, "a");
    write1(fx.d1.b, "b");
    auto pair_rank_same = [r](std::size_t i, std::size_t j) { return i * r + j; };
    auto write2_same = [&](const Tensor4& t, const char* name) {
        out << "block 2RDM " << name << "\n";
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = k + 1; l < r; ++l) {
                        if (pair_rank_same(i, j) > pair_rank_same(k, l)) continue;
                        if (t(i, j, k, l) != 0.0)
                            out << i + 1 << ' ' << j + 1 << ' ' << k + 1 << ' ' << l + 1 << ' '
                                << num(t(i, j, k, l)) << "\n";
                    }
    };
    write2_same(fx.d2.aa, "aa");
    {
        out << "block 2RDM ab\n";
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = 0; k < r; ++k)
                    for (std::size_t l = 0; l < r; ++l) {
                        if (pair_rank_same(i, j) > pair_rank_same(k, l)) continue;
                        if (fx.d2.ab(i, j, k, l) != 0.0)
                            out << i + 1 << ' ' << j + 1 << ' ' << k + 1 << ' ' << l + 1 << ' '
                                << num(fx.d2.ab(i, j, k, l)) << "\n";
                    }
    }
    write2_same(fx.d2.bb, "bb");
}

// ---------------------------------------------------------------------------
// validation report used by load_reference and the check subcommand

struct IdentityCheck {
    std::string name;
    double magnitude;  // violation size
    double tolerance;
    bool passed() const { return magnitude <= tolerance; }
};

inline std::vector<IdentityCheck> validate_rdms(const RdmFixture& fx) {
    constexpr double trace_tol = 1e-6, sym_tol = 1e-8;
    std::vector<IdentityCheck> checks;
    const auto tgt = rdm2_trace_targets(fx.space);
    const auto tr = rdm2_traces(fx.d2);
    const double na = static_cast<double>(fx.space.n_alpha), nb = static_cast<double>(fx.space.n_beta);
    checks.push_back({"Tr(1RDM_a) = N_a", std::abs(fx.d1.a.trace() - na), trace_tol});
    checks.push_back({"Tr(1RDM_b) = N_b", std::abs(fx.d1.b.trace() - nb), trace_tol});
    checks.push_back({"Tr(2RDM_aa) = Na(Na-1)/2", std::abs(tr.aa - tgt.aa), trace_tol});
    checks.push_back({"Tr(2RDM_ab) = Na*Nb/2", std::abs(tr.ab - tgt.ab), trace_tol});
    checks.push_back({"Tr(2RDM_bb) = Nb(Nb-1)/2", std::abs(tr.bb - tgt.bb), trace_tol});
    double sym1 = 0.0;
    for (const Mat* m : {&fx.d1.a, &fx.d1.b})
        for (std::size_t i = 0; i < m->rows(); ++i)
            for (std::size_t j = 0; j < i; ++j) sym1 = std::max(sym1, std::abs((*m)(i, j) - (*m)(j, i)));
    checks.push_back({"1RDM symmetry", sym1, sym_tol});
    checks.push_back({"2RDM hermiticity", hermiticity_defect(fx.d2), sym_tol});
    checks.push_back({"2RDM same-spin antisymmetry", antisymmetry_defect(fx.d2), sym_tol});
    if (fx.space.n_electrons() >= 2) {
        const Rdm1 back = partial_trace_2to1(fx.d2, fx.space);
        double dev = 0.0;
        for (std::size_t i = 0; i < fx.space.r; ++i)
            for (std::size_t j = 0; j < fx.space.r; ++j) {
                dev = std::max(dev, std::abs(back.a(i, j) - fx.d1.a(i, j)));
                dev = std::max(dev, std::abs(back.b(i, j) - fx.d1.b(i, j)));
            }
        checks.push_back({"partial trace 2RDM -> 1RDM", dev, trace_tol});
    }
    return checks;
}

}  // namespace acse
