#ifndef CVQKD_CHANNEL_HPP
#define CVQKD_CHANNEL_HPP

#include "cvqkd/finitesize.hpp"
#include "cvqkd/povm.hpp"

#include <utility>

namespace cvqkd::channel {

/// Gaussian channel: amplitude damping eta followed by a random displacement
/// whose density is (2/(pi xi)) e^{-2|gamma|^2/xi}.
struct ChannelParams {
    double eta = 1.0;
    double xi = 0.0;
    void validate() const;
    double attenuation_db() const;
    static ChannelParams from_attenuation_db(double db, double xi);
};

struct ChannelExpectations {
    double e_f_per_test = 0.0;       // E[F]/(N p_test)
    double p_plus = 0.0;             // success with matching bits
    double p_minus = 0.0;            // success with differing bits
    double e_bit = 0.0;              // P-/(P+ + P-)
    double e_n_suc_per_signal = 0.0; // P+ + P-
};

/// E[F] = (p_test N / (1 + xi/2)) [1 - ((xi/2)/(1 + r (1 + xi/2)))^{m+1}] for odd m.
/// Warns (returns normally) only when beta = sqrt(eta mu); otherwise throws,
/// since the closed form assumes the test reference matches the channel mean.
double expected_F(const ChannelParams& ch, const finitesize::ProtocolParams& p);

/// P_+- = (1/2) erfc[(x_th -+ sqrt(eta mu)) sqrt(2/(2 + xi))].
std::pair<double, double> success_probs(const ChannelParams& ch, const finitesize::ProtocolParams& p);

/// H_EC = 1.1 n_suc h(e_bit) with e_bit = P-/(P+ + P-); returns (h_ec, e_bit).
std::pair<double, double> ec_cost(double n_suc, double p_plus, double p_minus);

ChannelExpectations expectations(const ChannelParams& ch, const finitesize::ProtocolParams& p);

/// Joint qubit-pulse state after the honest Gaussian channel acts on the
/// entangled preparation, in X-basis blocks; positive, unit trace (renormalized,
/// drift checked against 1e-8).
struct JointState {
    povm::QubitFockOperator rho;
    double trace_drift = 0.0;
};
/// noise_order is the Gauss-Hermite order per noise quadrature axis; the
/// default converges past 1e-10 for xi <= 0.1.
JointState joint_state(const ChannelParams& ch, const finitesize::ProtocolParams& p,
                       const povm::FockSpace& space, int noise_order = 32);

/// Trace-inequality check Tr(M_ph rho) <= B - kappa Tr(Pi_fid rho) + gamma Tr(Pi_-^sig rho).
struct AsymptoticCheck {
    double tr_m_ph = 0.0;
    double tr_pi_fid = 0.0;
    double tr_pi_minus = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool holds = false;
};
AsymptoticCheck asymptotic_phase_error(const povm::QubitFockOperator& rho,
                                       const povm::QubitFockOperator& m_ph,
                                       const povm::QubitFockOperator& pi_fid,
                                       const povm::QubitFockOperator& pi_minus, double b_value,
                                       double kappa, double gamma, double tol = 1e-7);

}  // namespace cvqkd::channel

#endif  // CVQKD_CHANNEL_HPP
