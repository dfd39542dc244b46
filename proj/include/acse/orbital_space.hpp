#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

namespace acse {

// Spatial-orbital bookkeeping: orbital count, per-spin electron counts and the
// optional active-orbital subset (0-based).
struct OrbitalSpace {
    std::size_t r = 0;
    std::size_t n_alpha = 0;
    std::size_t n_beta = 0;
    std::set<std::size_t> active_set;

    std::size_t n_electrons() const { return n_alpha + n_beta; }

    void validate() const {
        if (n_alpha > r || n_beta > r)
            throw std::invalid_argument("OrbitalSpace: electron count exceeds orbital count");
        if (n_electrons() < 1) throw std::invalid_argument("OrbitalSpace: at least one electron required");
        for (auto o : active_set)
            if (o >= r) throw std::invalid_argument("OrbitalSpace: active orbital index out of range");
    }

    void require_pair_count() const {
        if (n_electrons() < 2)
            throw std::invalid_argument("OrbitalSpace: operation requires N >= 2 (uses 1/(N-1))");
    }

    bool is_active(std::size_t o) const { return active_set.count(o) != 0; }
};

}  // namespace acse
