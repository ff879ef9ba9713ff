#ifndef CVQKD_OPTIMIZE_HPP
#define CVQKD_OPTIMIZE_HPP

#include "cvqkd/channel.hpp"
#include "cvqkd/finitesize.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd::opt {

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

struct OptimizationConfig {
    Bounds mu{0.01, 4.0};
    Bounds p_sig{0.02, 0.98};
    Bounds x_th{0.0, 3.0};
    // finite-noise optima sit well inside this range; only the noiseless
    // ideal-channel corner keeps improving as kappa grows without bound
    Bounds kappa{0.0, 200.0};
    Bounds gamma{0.0, 200.0};
    int restarts = 3;         // outer multi-starts (first one uses the caller's hint)
    int inner_restarts = 3;   // (kappa, gamma) multi-starts beyond the fixed reference point
    double f_tol = 1e-10;     // simplex spread tolerance on the objective
    double x_tol = 1e-8;      // simplex diameter tolerance in transformed coordinates
    int max_evals = 400;      // per outer start
    int inner_max_evals = 220;
    std::uint64_t seed = 1;
    int n_max = 0;            // Fock cutoff; 0 = auto from the mu upper bound
    bool asymptotic = false;  // drop finite-size deviation terms and s, s' costs
    int workers = 0;          // sweep worker pool; 0 = CVQKD_WORKERS or hardware
    void validate() const;
};

struct RateOptions {
    int n_max = 0;
    bool asymptotic = false;
};

/// Deterministic end-to-end pipeline at fixed parameters: POVM moments ->
/// B(kappa, gamma) -> deviation terms -> U(E[F]) -> key length -> net gain.
/// beta is forced to sqrt(eta mu).
finitesize::KeyRateReport evaluate_rate(const channel::ChannelParams& ch,
                                        const finitesize::ProtocolParams& p,
                                        const RateOptions& opts = {});

struct OptimizeResult {
    finitesize::ProtocolParams params;
    finitesize::KeyRateReport report;
    bool converged = false;
    long evals = 0;
};

/// Nested search: Nelder-Mead over (mu, p_sig, x_th) in bound-enforcing
/// transformed coordinates, with an inner multi-start Nelder-Mead minimizing
/// U over (kappa, gamma) at every outer point. Deterministic given cfg.seed.
OptimizeResult optimize_point(const channel::ChannelParams& ch,
                              const finitesize::ProtocolParams& fixed,
                              const OptimizationConfig& cfg);

struct SweepRow {
    double atten_db = 0.0;
    double eta = 0.0;
    double xi = 0.0;
    double n_rounds = 0.0;
    double mu = 0.0;
    double p_sig = 0.0;
    double x_th = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double b_value = 0.0;
    double u_value = 0.0;
    double n_suc = 0.0;
    double h_ec = 0.0;
    double gain = 0.0;      // as computed, possibly negative
    double key_rate = 0.0;  // gain floored at 0
    std::string error;      // empty on success
};

/// Per-point optimization over an attenuation grid: a parallel cold pass
/// (pure per index) followed by sequential warm-start polish passes, so results
/// are reproducible for a fixed (seed, grid, config) regardless of worker count.
std::vector<SweepRow> sweep(const std::vector<double>& atten_db_grid, double xi, double n_rounds,
                            const finitesize::ProtocolParams& fixed, const OptimizationConfig& cfg);

}  // namespace cvqkd::opt

#endif  // CVQKD_OPTIMIZE_HPP
