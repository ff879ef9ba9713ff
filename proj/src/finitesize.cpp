#include "cvqkd/finitesize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvqkd::finitesize {

void ProtocolParams::validate() const {
    if (!(n_rounds > 0.0)) throw std::invalid_argument("protocol: n_rounds must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("protocol: mu must be positive");
    if (!(p_sig > 0.0) || !(p_sig < 1.0)) throw std::invalid_argument("protocol: p_sig must lie in (0, 1)");
    if (std::abs(p_sig + p_test - 1.0) > 1e-12)
        throw std::invalid_argument("protocol: p_sig + p_test must equal 1");
    if (beta < 0.0) throw std::invalid_argument("protocol: beta must be nonnegative");
    if (s < 1 || s_prime < 1) throw std::invalid_argument("protocol: s and s' must be positive integers");
    if (kappa < 0.0 || gamma < 0.0) throw std::invalid_argument("protocol: kappa and gamma must be nonnegative");
    if (x_th < 0.0) throw std::invalid_argument("protocol: x_th must be nonnegative");
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("protocol: epsilon must lie in (0, 1)");
    witness.validate();
}

double q_minus(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("q_minus: mu must be positive");
    return -0.5 * std::expm1(-2.0 * mu);
}

std::pair<double, double> c_range(const ProtocolParams& p, const math::WitnessExtrema& ext) {
    const double c_min = std::min(p.kappa * ext.lambda_min / p.p_test, -p.gamma / p.p_sig);
    const double c_max = std::max(p.kappa * ext.lambda_max / p.p_test, 1.0 / p.p_sig);
    return {c_min, c_max};
}

double delta_one(double n_rounds, double c_min, double c_max, double eps) {
    if (c_max < c_min) throw std::invalid_argument("delta_one: c_max must be >= c_min");
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("delta_one: eps must lie in (0, 1]");
    if (eps == 1.0) return 0.0;
    return (c_max - c_min) * std::sqrt(0.5 * n_rounds * (-std::log(eps)));
}

double delta_two(double n_rounds, double p_sig, double q_minus_value, double eps) {
    const double p = p_sig * q_minus_value;
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("delta_two: p_sig q_- must lie in (0, 1)");
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("delta_two: eps must lie in (0, 1]");
    if (eps == 1.0) return 0.0;
    const double target = -std::log(eps) / n_rounds;
    // saturated branch, compared as N ln p vs ln eps
    if (std::log(eps) <= n_rounds * std::log(p)) return (1.0 - p) * n_rounds;

    double lo = 0.0;                       // D = 0 < target
    double hi = (1.0 - p) * n_rounds;      // D = -ln p >= target here
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (math::kl_bernoulli_shift(p, mid / n_rounds) < target) lo = mid;
        else hi = mid;
    }
    const double delta = 0.5 * (lo + hi);
    const double residual = math::kl_bernoulli_shift(p, delta / n_rounds) - target;
    if (std::abs(residual) > 1e-9 * target)
        throw std::runtime_error("delta_two: bisection failed to meet the KL residual tolerance");
    return delta;
}

double phase_error_bound_U(const ProtocolParams& p, double b_value, double f_hat) {
    return phase_error_bound_U(p, b_value, f_hat, math::witness_extrema_cached(p.witness));
}

double phase_error_bound_U(const ProtocolParams& p, double b_value, double f_hat,
                           const math::WitnessExtrema& ext) {
    const auto [c_min, c_max] = c_range(p, ext);
    const double half_eps = 0.5 * p.epsilon;
    const double d1 = delta_one(p.n_rounds, c_min, c_max, half_eps);
    const double d2 = delta_two(p.n_rounds, p.p_sig, q_minus(p.mu), half_eps);
    return -p.kappa * (p.p_sig / p.p_test) * f_hat +
           p.gamma * (p.n_rounds * p.p_sig * q_minus(p.mu) + d2) +
           p.p_sig * (p.n_rounds * b_value + d1);
}

double key_length(double n_suc, double u, double s) {
    if (n_suc < 0.0) throw std::invalid_argument("key_length: n_suc must be nonnegative");
    if (n_suc == 0.0) return 0.0;
    const double ratio = std::max(u, 0.0) / n_suc;
    if (ratio >= 0.5) return 0.0;
    const double n_fin = n_suc * (1.0 - math::binary_entropy(ratio)) - s;
    return std::max(n_fin, 0.0);
}

long long key_length_bits(double n_suc, double u, double s) {
    return static_cast<long long>(std::floor(key_length(n_suc, u, s)));
}

double net_gain(double n_fin, double h_ec, double s_prime, double n_rounds) {
    return (n_fin - h_ec - s_prime) / n_rounds;
}

double security_level(double eps, int s, int s_prime) {
    if (eps < 0.0) throw std::invalid_argument("security_level: eps must be nonnegative");
    // sqrt(2) sqrt(eps + 2^-s) computed as one sqrt so the default parameters
    // reduce to an exact power of two
    return std::sqrt(2.0 * (eps + std::exp2(-s))) + std::exp2(-s_prime);
}

KeyRateReport assemble_report(const ProtocolParams& p, double b_value, int b_branch, double f_hat,
                              double n_suc, double e_bit, bool asymptotic) {
    p.validate();
    KeyRateReport rep;
    rep.b_value = b_value;
    rep.b_branch = b_branch;
    rep.f_hat = f_hat;
    rep.n_suc = n_suc;
    rep.e_bit = e_bit;
    rep.security_level = security_level(p.epsilon, p.s, p.s_prime);

    const math::WitnessExtrema& ext = math::witness_extrema_cached(p.witness);
    std::tie(rep.c_min, rep.c_max) = c_range(p, ext);
    const double q = q_minus(p.mu);
    if (!asymptotic) {
        rep.delta1 = delta_one(p.n_rounds, rep.c_min, rep.c_max, 0.5 * p.epsilon);
        rep.delta2 = delta_two(p.n_rounds, p.p_sig, q, 0.5 * p.epsilon);
    }
    rep.u_of_f = -p.kappa * (p.p_sig / p.p_test) * f_hat +
                 p.gamma * (p.n_rounds * p.p_sig * q + rep.delta2) +
                 p.p_sig * (p.n_rounds * b_value + rep.delta1);
    rep.h_ec = 1.1 * n_suc * math::binary_entropy(e_bit);
    const double s_cost = asymptotic ? 0.0 : static_cast<double>(p.s);
    const double s_prime_cost = asymptotic ? 0.0 : static_cast<double>(p.s_prime);
    rep.n_fin = key_length(n_suc, rep.u_of_f, s_cost);
    rep.gain = net_gain(rep.n_fin, rep.h_ec, s_prime_cost, p.n_rounds);
    return rep;
}

}  // namespace cvqkd::finitesize
