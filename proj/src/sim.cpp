#include "cvqkd/sim.hpp"

#include "cvqkd/bound.hpp"
#include "cvqkd/parallel.hpp"
#include "cvqkd/povm.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cvqkd::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t keyed_counter(std::uint64_t seed, std::uint64_t round, std::uint32_t stream) {
    std::uint64_t x = seed;
    x ^= mix64(round + 0x632be59bd9b4e019ULL);
    x ^= mix64(static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL);
    return mix64(x);
}

struct ChunkTally {
    std::uint64_t n_suc = 0, n_fail = 0, n_test = 0, bit_errors = 0;
    double f_hat = 0.0;
    double f_hat_sq = 0.0;
    double lam_min = 0.0, lam_max = 0.0;
    bool has_test = false;
};

constexpr std::uint64_t kChunk = 1ULL << 16;

}  // namespace

double CounterRng::uniform(std::uint64_t round, std::uint32_t stream) const {
    return static_cast<double>(keyed_counter(seed_, round, stream) >> 11) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::gaussian_pair(std::uint64_t round, std::uint32_t stream) const {
    // Box-Muller; first uniform shifted into (0, 1]
    const double u1 =
        (static_cast<double>(keyed_counter(seed_, round, stream) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform(round, stream + 1);
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return {mag * std::cos(kTwoPi * u2), mag * std::sin(kTwoPi * u2)};
}

SimTally run_protocol(const channel::ChannelParams& ch, const finitesize::ProtocolParams& p,
                      std::uint64_t seed, const SimOptions& opts) {
    ch.validate();
    p.validate();
    if (p.n_rounds != std::floor(p.n_rounds) || p.n_rounds > 9.0e15)
        throw std::invalid_argument("run_protocol: n_rounds must be a (moderate) integer");
    const std::uint64_t n_rounds = static_cast<std::uint64_t>(p.n_rounds);
    const math::WitnessExtrema& ext = math::witness_extrema_cached(p.witness);

    const double mean_amp = std::sqrt(ch.eta * p.mu);
    const double sigma_direct = std::sqrt(0.25 * (2.0 + ch.xi));
    const double sigma_disp = std::sqrt(0.25 * ch.xi);
    const double sigma_shot = std::sqrt(0.5);
    const CounterRng rng(seed);

    const std::uint64_t n_chunks = (n_rounds + kChunk - 1) / kChunk;
    std::vector<ChunkTally> chunks(static_cast<size_t>(n_chunks));

    parallel::for_each_index(n_chunks, opts.workers, [&](std::uint64_t c) {
        ChunkTally t;
        const std::uint64_t begin = c * kChunk;
        const std::uint64_t end = std::min(begin + kChunk, n_rounds);
        for (std::uint64_t i = begin; i < end; ++i) {
            const bool is_signal = rng.uniform(i, 0) < p.p_sig;
            const int a = rng.uniform(i, 1) < 0.5 ? 0 : 1;
            const double sign = a == 0 ? 1.0 : -1.0;
            double omega_r, omega_i;
            if (opts.noise == NoiseSampling::direct || ch.xi == 0.0) {
                const auto [z1, z2] = rng.gaussian_pair(i, 2);
                omega_r = sign * mean_amp + sigma_direct * z1;
                omega_i = sigma_direct * z2;
            } else {
                const auto [z1, z2] = rng.gaussian_pair(i, 2);
                const auto [d1, d2] = rng.gaussian_pair(i, 4);
                omega_r = sign * mean_amp + sigma_disp * d1 + sigma_shot * z1;
                omega_i = sigma_disp * d2 + sigma_shot * z2;
            }

            if (is_signal) {
                int b = -1;  // -1 = failure
                if (!opts.acceptance) {
                    if (omega_r >= p.x_th) b = 0;
                    else if (-omega_r >= p.x_th) b = 1;
                } else {
                    const double p0 = opts.acceptance(omega_r);
                    const double p1 = opts.acceptance(-omega_r);
                    if (p0 < 0.0 || p1 < 0.0 || p0 + p1 > 1.0 + 1e-12)
                        throw std::invalid_argument("run_protocol: invalid acceptance function");
                    const double u = rng.uniform(i, 6);
                    if (u < p0) b = 0;
                    else if (u < p0 + p1) b = 1;
                }
                if (b < 0) {
                    ++t.n_fail;
                } else {
                    ++t.n_suc;
                    if (b != a) ++t.bit_errors;
                }
            } else {
                const double dr = omega_r - sign * p.beta;
                const double nu = dr * dr + omega_i * omega_i;
                const double lam = lambda_witness(p.witness, nu);
                if (lam < ext.lambda_min - 1e-9 || lam > ext.lambda_max + 1e-9)
                    throw std::runtime_error("run_protocol: witness value escaped its extrema bracket");
                t.f_hat += lam;
                t.f_hat_sq += lam * lam;
                ++t.n_test;
                if (!t.has_test || lam < t.lam_min) t.lam_min = lam;
                if (!t.has_test || lam > t.lam_max) t.lam_max = lam;
                t.has_test = true;
            }
        }
        chunks[static_cast<size_t>(c)] = t;
    });

    SimTally tally;
    tally.n_rounds = n_rounds;
    tally.seed = seed;
    bool has_test = false;
    for (const ChunkTally& t : chunks) {  // fixed chunk order keeps merges bit-exact
        tally.n_suc += t.n_suc;
        tally.n_fail += t.n_fail;
        tally.n_test += t.n_test;
        tally.bit_errors += t.bit_errors;
        tally.f_hat += t.f_hat;
        tally.f_hat_sq += t.f_hat_sq;
        if (t.has_test) {
            if (!has_test || t.lam_min < tally.lambda_min_seen) tally.lambda_min_seen = t.lam_min;
            if (!has_test || t.lam_max > tally.lambda_max_seen) tally.lambda_max_seen = t.lam_max;
            has_test = true;
        }
    }
    if (tally.n_suc + tally.n_fail + tally.n_test != n_rounds)
        throw std::runtime_error("run_protocol: round bookkeeping mismatch");
    return tally;
}

finitesize::KeyRateReport simulated_key(const SimTally& tally, const finitesize::ProtocolParams& p) {
    p.validate();
    if (static_cast<double>(tally.n_rounds) != p.n_rounds)
        throw std::invalid_argument("simulated_key: tally round count disagrees with the parameters");

    povm::FockSpace space{povm::FockSpace::recommended_cutoff(p.beta)};
    const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
    const povm::PovmMoments mom = povm::povm_moments(space, p.beta, sp.m_ev, sp.m_od);
    const bound::DualBound db = bound::dual_bound(mom, p.kappa, p.gamma);

    const double n_suc = static_cast<double>(tally.n_suc);
    const double e_bit = tally.n_suc > 0
                             ? static_cast<double>(tally.bit_errors) / static_cast<double>(tally.n_suc)
                             : 0.0;
    return finitesize::assemble_report(p, db.b_value, db.attained_branch, tally.f_hat, n_suc, e_bit);
}

}  // namespace cvqkd::sim
