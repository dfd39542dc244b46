#pragma once

// Iterative ACSE driver: residual -> mask -> update -> Euler step -> energy,
// with the stopping rules
//   |E_n - E_{n-1}| < e_tol            -> EnergyConverged (current iterate)
//   E_n > E_{n-1}                      -> EnergyIncreased (previous iterate)
//   rho_n > rho_{n-1} (pre-mask norms) -> ResidualIncreased (previous iterate)
//   n = max_iter                       -> MaxIter
// The convergence test runs first so that a sub-tolerance float-noise uptick
// at an already-converged reference still reports EnergyConverged. Non-finite
// energies or norms terminate with the last finite iterate.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "acse/rdm.hpp"
#include "acse/rdm_io.hpp"
#include "acse/recon.hpp"
#include "acse/reduced_h.hpp"
#include "acse/residual.hpp"

namespace acse {

struct SolverConfig {
    double epsilon = 1e-3;
    ReconstructionKind recon = ReconstructionKind::Valdemoro;
    MaskMode mask = MaskMode::PropagateActive;
    double e_tol = 1e-6;
    std::size_t max_iter = 10000;
    bool refresh_d1 = true;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
        if (!(e_tol > 0.0)) throw std::invalid_argument("SolverConfig: e_tol must be positive");
        if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be at least 1");
    }
};

struct TrajectoryRecord {
    std::size_t n = 0;
    double lambda = 0.0;  // epsilon * n, exactly
    double energy = 0.0;
    double residual_norm = 0.0;  // pre-mask Frobenius norm
};

enum class TerminationReason { EnergyConverged, EnergyIncreased, ResidualIncreased, MaxIter };

inline const char* to_string(TerminationReason t) {
    switch (t) {
        case TerminationReason::EnergyConverged: return "EnergyConverged";
        case TerminationReason::EnergyIncreased: return "EnergyIncreased";
        case TerminationReason::ResidualIncreased: return "ResidualIncreased";
        case TerminationReason::MaxIter: return "MaxIter";
    }
    return "?";
}

struct AcseResult {
    Rdm1 d1;
    Rdm2 d2;
    double energy = 0.0;
    TerminationReason reason = TerminationReason::MaxIter;
    std::size_t iterations = 0;  // index of the returned iterate
    std::vector<TrajectoryRecord> trajectory;
};

// Reference ingestion: "hf" or a path to an ACSE-RDM v1 fixture. Validates
// traces and symmetries; the first failed identity is named in the error.
inline std::pair<Rdm1, Rdm2> load_reference(const std::string& source, const OrbitalSpace& space) {
    if (source == "hf") return hf_reference(space);
    std::ifstream in(source);
    if (!in) throw rdm_io_error("cannot open RDM file: " + source);
    RdmFixture fx = read_rdm_fixture(in);
    if (fx.space.r != space.r || fx.space.n_alpha != space.n_alpha || fx.space.n_beta != space.n_beta)
        throw rdm_io_error("RDM fixture does not match the orbital space (norb/nelec)");
    for (const auto& chk : validate_rdms(fx))
        if (!chk.passed())
            throw rdm_io_error("RDM validation failed: " + chk.name + " violated by " +
                               std::to_string(chk.magnitude));
    return {std::move(fx.d1), std::move(fx.d2)};
}

namespace detail {

inline void axpy_blocks(Rdm2& d2, double eps, const UpdateTensor& u) {
    for (std::size_t x = 0; x < d2.aa.size(); ++x) d2.aa.data()[x] += eps * u.aa.data()[x];
    for (std::size_t x = 0; x < d2.ab.size(); ++x) d2.ab.data()[x] += eps * u.ab.data()[x];
    for (std::size_t x = 0; x < d2.bb.size(); ++x) d2.bb.data()[x] += eps * u.bb.data()[x];
}

}  // namespace detail

inline AcseResult solve(const ReducedH& kh, Rdm1 d1, Rdm2 d2, const OrbitalSpace& space,
                        const SolverConfig& cfg,
                        const std::function<void(const TrajectoryRecord&)>& on_record = {}) {
    cfg.validate();
    space.validate();
    space.require_pair_count();
    if (kh.r() != space.r || d2.r() != space.r || d1.r() != space.r)
        throw std::invalid_argument("solve: dimension mismatch");
    if (cfg.mask == MaskMode::RestrictActive && space.active_set.empty())
        throw std::invalid_argument("solve: RestrictActive requires a non-empty active set");
    {
        RdmFixture fx;
        fx.space = space;
        fx.d1 = d1;
        fx.d2 = d2;
        for (const auto& chk : validate_rdms(fx))
            if (!chk.passed())
                throw std::invalid_argument("solve: reference RDMs violate " + chk.name + " by " +
                                            std::to_string(chk.magnitude));
    }

    const OccupationSignature sig = OccupationSignature::aufbau(space);
    if (cfg.recon == ReconstructionKind::NakatsujiYasuda) {
        // NY is defined against an aufbau reference; warn when the reference
        // cumulant is large inside the active space.
        const Cumulant2 c = cumulant2(d2, d1);
        double n2 = 0.0;
        const bool restrict_to_active = !space.active_set.empty();
        for (const Tensor4* b : {&c.aa, &c.ab, &c.bb})
            for (std::size_t i = 0; i < space.r; ++i)
                for (std::size_t j = 0; j < space.r; ++j)
                    for (std::size_t k = 0; k < space.r; ++k)
                        for (std::size_t l = 0; l < space.r; ++l) {
                            if (restrict_to_active && !(space.is_active(i) && space.is_active(j) &&
                                                        space.is_active(k) && space.is_active(l)))
                                continue;
                            n2 += (*b)(i, j, k, l) * (*b)(i, j, k, l);
                        }
        if (std::sqrt(n2) > 0.1)
            std::cerr << "warning: NY reconstruction with a strongly correlated reference "
                         "(|2-cumulant| = "
                      << std::sqrt(n2) << " in the active space); results may be unreliable\n";
    }
    const OccupationSignature* sigp = &sig;

    AcseResult res;
    res.trajectory.reserve(std::min<std::size_t>(cfg.max_iter + 1, 4096));

    ResidualTensor resid = residual_contracted(kh, d2, d1, cfg.recon, sigp);
    double rho_prev = residual_norm(resid);
    double e_prev = energy_from_reducedH(kh, d2);
    {
        TrajectoryRecord rec{0, 0.0, e_prev, rho_prev};
        res.trajectory.push_back(rec);
        if (on_record) on_record(rec);
    }

    Rdm1 d1_prev = d1;
    Rdm2 d2_prev = d2;

    auto finish = [&](std::size_t n, TerminationReason why, bool keep_current) {
        res.reason = why;
        if (keep_current) {
            res.d1 = std::move(d1);
            res.d2 = std::move(d2);
            res.energy = res.trajectory.back().energy;
            res.iterations = n;
        } else {
            res.d1 = std::move(d1_prev);
            res.d2 = std::move(d2_prev);
            res.energy = res.trajectory[res.trajectory.size() - 2].energy;
            res.iterations = n - 1;
        }
        return std::move(res);
    };

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        const ResidualTensor masked = apply_mask(std::move(resid), space, cfg.mask);
        const UpdateTensor u = update_contracted(masked, d2, d1, cfg.recon, sigp);

        d1_prev = d1;
        d2_prev = d2;

        // U is the bare commutator <[a+a+aa, R]>; the 2-RDM carries the 1/2
        // normalization, so one unit of the unitary flow exp(eps R) advances
        // it by eps * U/2.
        detail::axpy_blocks(d2, 0.5 * cfg.epsilon, u);
        symmetrize_rdm2(d2);
        if (cfg.refresh_d1) d1 = partial_trace_2to1(d2, space);

        const double e_n = energy_from_reducedH(kh, d2);
        resid = residual_contracted(kh, d2, d1, cfg.recon, sigp);
        const double rho_n = residual_norm(resid);

        TrajectoryRecord rec{n, cfg.epsilon * static_cast<double>(n), e_n, rho_n};
        res.trajectory.push_back(rec);
        if (on_record) on_record(rec);

        if (!std::isfinite(e_n)) return finish(n, TerminationReason::EnergyIncreased, false);
        if (!std::isfinite(rho_n)) return finish(n, TerminationReason::ResidualIncreased, false);
        if (std::abs(e_n - e_prev) < cfg.e_tol) return finish(n, TerminationReason::EnergyConverged, true);
        if (e_n > e_prev) return finish(n, TerminationReason::EnergyIncreased, false);
        if (rho_n > rho_prev) return finish(n, TerminationReason::ResidualIncreased, false);
        e_prev = e_n;
        rho_prev = rho_n;
    }
    return finish(cfg.max_iter, TerminationReason::MaxIter, true);
}

// ---------------------------------------------------------------------------
// trajectory CSV (17 significant digits, flushed per row)

inline void write_trajectory_header(std::ostream& out) {
    out << "n,lambda,energy,residual_norm\n";
    out.flush();
}

inline void write_trajectory_row(std::ostream& out, const TrajectoryRecord& rec) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", rec.n, rec.lambda, rec.energy,
                  rec.residual_norm);
    out << buf;
    out.flush();
}

}  // namespace acse
