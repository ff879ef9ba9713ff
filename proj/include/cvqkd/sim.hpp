#ifndef CVQKD_SIM_HPP
#define CVQKD_SIM_HPP

#include "cvqkd/channel.hpp"
#include "cvqkd/finitesize.hpp"

#include <cstdint>
#include <functional>
#include <utility>

namespace cvqkd::sim {

/// Counter-based generator: every draw is a pure function of (seed, round, stream),
/// so rounds can be partitioned across workers in any order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    double uniform(std::uint64_t round, std::uint32_t stream) const;           // in [0, 1)
    std::pair<double, double> gaussian_pair(std::uint64_t round, std::uint32_t stream) const;
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

struct SimTally {
    std::uint64_t n_rounds = 0;
    std::uint64_t n_suc = 0;
    std::uint64_t n_fail = 0;
    std::uint64_t n_test = 0;
    std::uint64_t bit_errors = 0;
    double f_hat = 0.0;     // sum of Lambda over test rounds
    double f_hat_sq = 0.0;  // sum of Lambda^2, for empirical-variance checks
    std::uint64_t seed = 0;
    double lambda_min_seen = 0.0;
    double lambda_max_seen = 0.0;
};

enum class NoiseSampling {
    direct,     // one Gaussian with per-quadrature variance (2 + xi)/4
    two_stage,  // displacement (variance xi/4) then shot noise (variance 1/2)
};

struct SimOptions {
    NoiseSampling noise = NoiseSampling::direct;
    /// Non-empty switches the signal decision to the randomized-response form of
    /// the acceptance probabilities, with this f_suc,0. Default: the step function,
    /// for which the bit is deterministic in omega_R.
    std::function<double(double)> acceptance;
    int workers = 0;  // 0 = hardware concurrency
};

SimTally run_protocol(const channel::ChannelParams& ch, const finitesize::ProtocolParams& p,
                      std::uint64_t seed, const SimOptions& opts = {});

/// Finite-size key report from empirical statistics (empirical F, N_suc, e_bit).
finitesize::KeyRateReport simulated_key(const SimTally& tally, const finitesize::ProtocolParams& p);

}  // namespace cvqkd::sim

#endif  // CVQKD_SIM_HPP
