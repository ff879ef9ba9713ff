#ifndef CVQKD_FINITESIZE_HPP
#define CVQKD_FINITESIZE_HPP

#include "cvqkd/mathkit.hpp"

#include <utility>

namespace cvqkd::finitesize {

/// Tunable protocol constants. n_rounds is kept real so rate curves can be
/// evaluated at any N; the simulator requires it to be integral.
struct ProtocolParams {
    double n_rounds = 1e11;
    double mu = 0.5;
    double p_sig = 0.5;
    double p_test = 0.5;
    double beta = 0.0;  // 0 means "set to sqrt(eta mu) by the caller"
    int s = 104;
    int s_prime = 51;
    double kappa = 1.0;
    double gamma = 1.0;
    math::WitnessParams witness;
    double x_th = 0.5;
    double epsilon = 0x1p-104;
    void validate() const;
};

struct KeyRateReport {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double b_value = 0.0;
    int b_branch = 0;
    double c_min = 0.0, c_max = 0.0;
    double f_hat = 0.0;   // test statistic fed into U
    double u_of_f = 0.0;
    double n_suc = 0.0;
    double e_bit = 0.0;
    double h_ec = 0.0;
    double n_fin = 0.0;
    double gain = 0.0;
    double security_level = 0.0;
};

/// q_- = (1 - e^{-2 mu}) / 2, the weight of |-> in Alice's reduced qubit state.
double q_minus(double mu);

/// Range [c_min, c_max] of the per-round estimator increment:
/// c_min = min(kappa min(Lambda)/p_test, -gamma/p_sig),
/// c_max = max(kappa max(Lambda)/p_test, 1/p_sig).
std::pair<double, double> c_range(const ProtocolParams& p, const math::WitnessExtrema& ext);

/// Azuma deviation term delta_1(eps) = (c_max - c_min) sqrt((N/2) ln(1/eps)).
double delta_one(double n_rounds, double c_min, double c_max, double eps);

/// Chernoff-Hoeffding deviation term: the unique delta in (0, (1-p)N) with
/// D(p + delta/N || p) = -ln(eps)/N, where p = p_sig q_-; the saturated branch
/// (1 - p) N applies when eps <= p^N (compared in log domain).
double delta_two(double n_rounds, double p_sig, double q_minus_value, double eps);

/// Phase-error bound U(F) = -kappa (p_sig/p_test) F
///                          + gamma (N p_sig q_- + delta_2(eps/2))
///                          + p_sig (N B + delta_1(eps/2)).
double phase_error_bound_U(const ProtocolParams& p, double b_value, double f_hat);

/// Same, but reusing precomputed witness extrema (hot path for the optimizer).
double phase_error_bound_U(const ProtocolParams& p, double b_value, double f_hat,
                           const math::WitnessExtrema& ext);

/// Final key length N_fin = n_suc (1 - h(U/n_suc)) - s, clamped at zero;
/// zero whenever n_suc = 0 or U/n_suc >= 1/2. Kept real for rate curves.
double key_length(double n_suc, double u, double s);

/// Integer key length for protocol accounting (floor of the real value).
long long key_length_bits(double n_suc, double u, double s);

/// Net key gain per pulse (N_fin - H_EC - s') / N; may be negative.
double net_gain(double n_fin, double h_ec, double s_prime, double n_rounds);

/// Security level sqrt(2 (eps + 2^{-s})) + 2^{-s'}.
double security_level(double eps, int s, int s_prime);

/// Full finite-size report from a dual-bound value and (analytic or empirical)
/// statistics. In asymptotic mode the deviation terms and the s, s' costs are
/// dropped (delta_1 = delta_2 = 0, s = s' = 0).
KeyRateReport assemble_report(const ProtocolParams& p, double b_value, int b_branch, double f_hat,
                              double n_suc, double e_bit, bool asymptotic = false);

}  // namespace cvqkd::finitesize

#endif  // CVQKD_FINITESIZE_HPP
