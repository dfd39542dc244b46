#pragma once

// FCIDUMP reader/writer. Files carry chemist-convention integrals (ij|kl) with
// 1-based indices; internally we store the two-body Hamiltonian coefficient
// tensor twoV[p][q][r][s] = (1/2) <pq|rs> = (1/2) (pr|qs) over 0-based
// orbitals, so that H = sum 1K a+a + sum 2V a+a+aa holds with the stored
// values. raw_eri() recovers the plain physicist integral.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "acse/orbital_space.hpp"
#include "acse/tensor.hpp"

namespace acse {

struct IntegralSet {
    double e_nuc = 0.0;
    Mat oneK;      // r x r, symmetric
    Tensor4 twoV;  // Hamiltonian coefficient (1/2)<pq|rs>, 8-fold real symmetry

    std::size_t r() const { return oneK.rows(); }
    // plain physicist integral <pq|rs>
    double raw_eri(std::size_t p, std::size_t q, std::size_t rr, std::size_t s) const {
        return 2.0 * twoV(p, q, rr, s);
    }
};

class fcidump_error : public std::runtime_error {
  public:
    explicit fcidump_error(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

inline double parse_fortran_double(std::string tok, bool& ok) {
    for (auto& c : tok)
        if (c == 'D' || c == 'd') c = 'E';
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    ok = end != nullptr && *end == '\0' && end != tok.c_str();
    return v;
}

}  // namespace detail

inline std::pair<OrbitalSpace, IntegralSet> parse_fcidump(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // --- namelist header: &FCI ... &END (or a bare "/")
    const auto amp = text.find('&');
    if (amp == std::string::npos) throw fcidump_error("FCIDUMP: missing &FCI namelist");
    {
        std::string head = text.substr(amp + 1, 3);
        for (auto& c : head) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (head != "FCI") throw fcidump_error("FCIDUMP: namelist is not &FCI");
    }
    std::size_t body = std::string::npos;
    std::size_t hdr_end = std::string::npos;
    for (std::size_t i = amp + 4; i < text.size(); ++i) {
        if (text[i] == '/') {
            hdr_end = i;
            body = i + 1;
            break;
        }
        if (text[i] == '&') {
            std::string tag = text.substr(i + 1, 3);
            for (auto& c : tag) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (tag == "END") {
                hdr_end = i;
                body = i + 4;
                break;
            }
            throw fcidump_error("FCIDUMP: malformed namelist terminator");
        }
    }
    if (body == std::string::npos) throw fcidump_error("FCIDUMP: unterminated namelist");

    std::string header;
    {
        std::string raw = text.substr(amp + 4, hdr_end - (amp + 4));
        for (auto& c : raw)
            if (c == ',' || c == '\n' || c == '\r' || c == '\t') c = ' ';
        // drop blanks adjacent to '=' so "KEY = VALUE" tokenizes as one item
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == ' ') {
                std::size_t nxt = raw.find_first_not_of(' ', i);
                const bool before_eq = nxt != std::string::npos && raw[nxt] == '=';
                const bool after_eq = !header.empty() && header.back() == '=';
                if (before_eq || after_eq) continue;
            }
            header.push_back(raw[i]);
        }
    }
    // split on '=' assignments; a value list keeps consuming bare tokens
    std::istringstream hs(header);
    std::map<std::string, std::vector<std::string>> kv;
    std::string tok, cur;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) {
            cur = tok.substr(0, eq);
            for (auto& c : cur) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            kv[cur] = {};
            std::string rest = tok.substr(eq + 1);
            if (!rest.empty()) kv[cur].push_back(rest);
        } else if (!cur.empty()) {
            kv[cur].push_back(tok);
        } else {
            throw fcidump_error("FCIDUMP: stray token in namelist: " + tok);
        }
    }
    auto get_int = [&](const std::string& key, bool required, long def) -> long {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) {
            if (required) throw fcidump_error("FCIDUMP: namelist missing " + key);
            return def;
        }
        try {
            return std::stol(it->second.front());
        } catch (...) {
            throw fcidump_error("FCIDUMP: bad integer for " + key);
        }
    };
    const long norb = get_int("NORB", true, 0);
    const long nelec = get_int("NELEC", true, 0);
    const long ms2 = get_int("MS2", false, 0);
    if (norb <= 0) throw fcidump_error("FCIDUMP: NORB must be positive");
    if (nelec < 0) throw fcidump_error("FCIDUMP: NELEC must be non-negative");
    if ((nelec + ms2) % 2 != 0 || nelec + ms2 < 0 || nelec - ms2 < 0)
        throw fcidump_error("FCIDUMP: NELEC/MS2 parity mismatch");

    OrbitalSpace space;
    space.r = static_cast<std::size_t>(norb);
    space.n_alpha = static_cast<std::size_t>((nelec + ms2) / 2);
    space.n_beta = static_cast<std::size_t>((nelec - ms2) / 2);
    if (space.n_alpha > space.r || space.n_beta > space.r)
        throw fcidump_error("FCIDUMP: electron count exceeds NORB");

    IntegralSet ints;
    ints.oneK = Mat(space.r, space.r);
    ints.twoV = Tensor4(space.r);

    const std::size_t r = space.r;
    std::vector<char> seen1(r * r, 0), seen2(r * r * r * r, 0);
    char e_nuc_seen = 0;
    constexpr double dup_tol = 1e-12;

    auto set1 = [&](std::size_t i, std::size_t j, double v, std::size_t line) {
        if (seen1[i * r + j] && std::abs(ints.oneK(i, j) - v) > dup_tol)
            throw fcidump_error("FCIDUMP line " + std::to_string(line) + ": conflicting duplicate one-electron entry");
        ints.oneK(i, j) = v;
        seen1[i * r + j] = 1;
    };
    auto set2 = [&](std::size_t p, std::size_t q, std::size_t s, std::size_t t, double v, std::size_t line) {
        const std::size_t idx = ((p * r + q) * r + s) * r + t;
        if (seen2[idx] && std::abs(ints.twoV(p, q, s, t) - v) > dup_tol)
            throw fcidump_error("FCIDUMP line " + std::to_string(line) + ": conflicting duplicate two-electron entry");
        ints.twoV(p, q, s, t) = v;
        seen2[idx] = 1;
    };

    std::istringstream bs(text.substr(body));
    std::string lbuf;
    std::size_t line_no = 0;
    for (std::size_t pre = 0; pre < body; ++pre)
        if (text[pre] == '\n') ++line_no;
    while (std::getline(bs, lbuf)) {
        ++line_no;
        std::istringstream ls(lbuf);
        std::string vt;
        if (!(ls >> vt)) continue;  // blank line
        bool ok = false;
        const double value = detail::parse_fortran_double(vt, ok);
        if (!ok) throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": bad value token '" + vt + "'");
        long i, j, k, l;
        if (!(ls >> i >> j >> k >> l))
            throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": expected four indices");
        std::string extra;
        if (ls >> extra) throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": trailing tokens");
        for (long x : {i, j, k, l})
            if (x < 0 || x > norb)
                throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": index out of range [1, NORB]");

        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (e_nuc_seen && std::abs(ints.e_nuc - value) > dup_tol)
                throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": conflicting nuclear repulsion");
            ints.e_nuc = value;
            e_nuc_seen = 1;
        } else if (k == 0 && l == 0 && i > 0 && j > 0) {
            const std::size_t a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
            set1(a, b, value, line_no);
            set1(b, a, value, line_no);
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            const std::size_t a = static_cast<std::size_t>(i - 1), b = static_cast<std::size_t>(j - 1);
            const std::size_t c = static_cast<std::size_t>(k - 1), d = static_cast<std::size_t>(l - 1);
            const double w = 0.5 * value;  // Hamiltonian coefficient carries the 1/2
            // chemist (ab|cd) = <ac|bd>; expand the 8-fold real symmetry
            const std::size_t im[8][4] = {{a, b, c, d}, {b, a, c, d}, {a, b, d, c}, {b, a, d, c},
                                          {c, d, a, b}, {d, c, a, b}, {c, d, b, a}, {d, c, b, a}};
            for (const auto& m : im) set2(m[0], m[2], m[1], m[3], w, line_no);
        } else {
            throw fcidump_error("FCIDUMP line " + std::to_string(line_no) + ": unsupported index pattern");
        }
    }
    return {space, ints};
}

inline void write_fcidump(std::ostream& out, const OrbitalSpace& space, const IntegralSet& ints) {
    const std::size_t r = space.r;
    out << "&FCI NORB=" << r << ",NELEC=" << space.n_electrons() << ",MS2="
        << static_cast<long>(space.n_alpha) - static_cast<long>(space.n_beta) << ",\n ORBSYM=";
    for (std::size_t i = 0; i < r; ++i) out << "1,";
    out << "\n ISYM=1,\n&END\n";
    char buf[64];
    auto emit = [&](double v, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << ' ' << i << ' ' << j << ' ' << k << ' ' << l << '\n';
    };
    // unique chemist entries: (ij|kl) with i>=j, k>=l, (ij)>=(kl)
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            for (std::size_t k = 0; k <= i; ++k)
                for (std::size_t l = 0; l <= k; ++l) {
                    if (i * (i + 1) / 2 + j < k * (k + 1) / 2 + l) continue;
                    const double chem = 2.0 * ints.twoV(i, k, j, l);  // (ij|kl) = <ik|jl>
                    if (chem != 0.0) emit(chem, i + 1, j + 1, k + 1, l + 1);
                }
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            if (ints.oneK(i, j) != 0.0) emit(ints.oneK(i, j), i + 1, j + 1, 0, 0);
    emit(ints.e_nuc, 0, 0, 0, 0);
}

}  // namespace acse
