#include "cvqkd/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace cvqkd::channel {

namespace {

constexpr double kPi = 3.141592653589793238462643;

using Cplx = std::complex<double>;

// Coherent vector for a complex amplitude (no tail check; callers budget the cutoff).
linalg::CVector coherent_cvector(const povm::FockSpace& space, Cplx alpha) {
    linalg::CVector v(space.dim());
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < space.dim(); ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return v;
}

}  // namespace

void ChannelParams::validate() const {
    if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("channel: eta must lie in (0, 1]");
    if (xi < 0.0) throw std::invalid_argument("channel: xi must be nonnegative");
}

double ChannelParams::attenuation_db() const {
    const double db = -10.0 * std::log10(eta);
    return db == 0.0 ? 0.0 : db;  // avoid -0 in reports
}

ChannelParams ChannelParams::from_attenuation_db(double db, double xi) {
    ChannelParams ch;
    ch.eta = std::pow(10.0, -db / 10.0);
    ch.xi = xi;
    ch.validate();
    return ch;
}

double expected_F(const ChannelParams& ch, const finitesize::ProtocolParams& p) {
    ch.validate();
    p.validate();
    const double beta_ref = std::sqrt(ch.eta * p.mu);
    // the 2e-6 allowance covers the degenerate-beta clamp in deep-loss regimes
    if (std::abs(p.beta - beta_ref) > 1e-9 * std::max(1.0, beta_ref) &&
        std::abs(p.beta - beta_ref) > 2e-6)
        throw std::invalid_argument("expected_F: closed form requires beta = sqrt(eta mu)");
    const double half_xi = 0.5 * ch.xi;
    const double ratio = half_xi / (1.0 + p.witness.r * (1.0 + half_xi));
    // (-1)^{m+1} = +1 for odd m
    const double bracket = 1.0 - std::pow(ratio, p.witness.m + 1);
    return p.p_test * p.n_rounds * bracket / (1.0 + half_xi);
}

std::pair<double, double> success_probs(const ChannelParams& ch, const finitesize::ProtocolParams& p) {
    ch.validate();
    if (p.x_th < 0.0) throw std::invalid_argument("success_probs: x_th must be nonnegative");
    const double mean = std::sqrt(ch.eta * p.mu);
    const double scale = std::sqrt(2.0 / (2.0 + ch.xi));
    const double p_plus = 0.5 * math::erfc_comp((p.x_th - mean) * scale);
    const double p_minus = 0.5 * math::erfc_comp((p.x_th + mean) * scale);
    return {p_plus, p_minus};
}

std::pair<double, double> ec_cost(double n_suc, double p_plus, double p_minus) {
    if (!(p_plus + p_minus > 0.0))
        throw std::invalid_argument("ec_cost: total success probability must be positive");
    const double e_bit = p_minus / (p_plus + p_minus);
    const double h_ec = 1.1 * n_suc * math::binary_entropy(e_bit);
    return {h_ec, e_bit};
}

ChannelExpectations expectations(const ChannelParams& ch, const finitesize::ProtocolParams& p) {
    ChannelExpectations e;
    e.e_f_per_test = expected_F(ch, p) / (p.n_rounds * p.p_test);
    std::tie(e.p_plus, e.p_minus) = success_probs(ch, p);
    e.e_n_suc_per_signal = e.p_plus + e.p_minus;
    e.e_bit = e.p_minus / (e.p_plus + e.p_minus);
    return e;
}

JointState joint_state(const ChannelParams& ch, const finitesize::ProtocolParams& p,
                       const povm::FockSpace& space, int noise_order) {
    ch.validate();
    p.validate();
    space.validate();
    if (noise_order < 2) throw std::invalid_argument("joint_state: noise quadrature order too small");
    const double s = std::sqrt(ch.eta * p.mu);
    const double noise_scale = std::sqrt(0.5 * ch.xi);  // gamma = noise_scale (t + i u)

    // truncation budget: signal mean plus the outermost quadrature displacement
    const double reach = s + 4.0 * noise_scale;
    if (povm::coherent_tail_mass(space.n_max, reach) > 1e-10)
        throw std::invalid_argument("joint_state: truncation budget does not cover the noise spread");

    const int dim = space.dim();
    // Z-basis qubit blocks rho^{a a'}; (0,1) determines (1,0) by symmetry.
    linalg::CMatrix z00 = linalg::CMatrix::Zero(dim, dim);
    linalg::CMatrix z11 = linalg::CMatrix::Zero(dim, dim);
    linalg::CMatrix z01 = linalg::CMatrix::Zero(dim, dim);

    // loss-induced decoherence of the qubit coherence: overlap of the two
    // environment states of the beam-splitter purification
    const double loss_factor = std::exp(-2.0 * (1.0 - ch.eta) * p.mu);

    const auto accumulate = [&](Cplx gamma, double weight) {
        const linalg::CVector v_plus = coherent_cvector(space, Cplx(s, 0.0) + gamma);
        const linalg::CVector v_minus = coherent_cvector(space, Cplx(-s, 0.0) + gamma);
        z00.noalias() += weight * (v_plus * v_plus.adjoint());
        z11.noalias() += weight * (v_minus * v_minus.adjoint());
        // Weyl phase of D(gamma)|s><-s|D(gamma)^dag: e^{2 i s Im(gamma)}
        const Cplx phase = std::exp(Cplx(0.0, 2.0 * s * gamma.imag()));
        z01.noalias() += (weight * phase) * (v_plus * v_minus.adjoint());
    };

    if (ch.xi == 0.0) {
        accumulate(Cplx(0.0, 0.0), 1.0);
    } else {
        const math::GaussHermite gh = math::gauss_hermite(noise_order);
        for (size_t i = 0; i < gh.nodes.size(); ++i)
            for (size_t j = 0; j < gh.nodes.size(); ++j)
                accumulate(noise_scale * Cplx(gh.nodes[i], gh.nodes[j]),
                           gh.weights[i] * gh.weights[j] / kPi);
    }

    z00 *= 0.5;
    z11 *= 0.5;
    z01 *= 0.5 * loss_factor;

    JointState out;
    const double trace = z00.real().trace() + z11.real().trace();
    out.trace_drift = std::abs(trace - 1.0);
    if (out.trace_drift > 1e-8)
        throw std::runtime_error("joint_state: trace drift above 1e-8; raise n_max or quadrature order");
    z00 /= trace;
    z11 /= trace;
    z01 /= trace;

    const double imag_norm = std::max({z00.imag().cwiseAbs().maxCoeff(), z11.imag().cwiseAbs().maxCoeff(),
                                       z01.imag().cwiseAbs().maxCoeff()});
    if (imag_norm > 1e-10)
        throw std::runtime_error("joint_state: residual imaginary parts; quadrature asymmetry");

    const linalg::Matrix r00 = z00.real();
    const linalg::Matrix r11 = z11.real();
    const linalg::Matrix r01 = z01.real();
    const linalg::Matrix r10 = r01.transpose();

    povm::QubitFockOperator rho = povm::QubitFockOperator::zero(space);
    rho.pp = 0.5 * (r00 + r01 + r10 + r11);
    rho.pm = 0.5 * (r00 - r01 + r10 - r11);
    rho.mp = 0.5 * (r00 + r01 - r10 - r11);
    rho.mm = 0.5 * (r00 - r01 - r10 + r11);
    out.rho = rho;
    return out;
}

AsymptoticCheck asymptotic_phase_error(const povm::QubitFockOperator& rho,
                                       const povm::QubitFockOperator& m_ph,
                                       const povm::QubitFockOperator& pi_fid,
                                       const povm::QubitFockOperator& pi_minus, double b_value,
                                       double kappa, double gamma, double tol) {
    AsymptoticCheck chk;
    chk.tr_m_ph = m_ph.trace_with(rho);
    chk.tr_pi_fid = pi_fid.trace_with(rho);
    chk.tr_pi_minus = pi_minus.trace_with(rho);
    chk.rhs = b_value - kappa * chk.tr_pi_fid + gamma * chk.tr_pi_minus;
    chk.margin = chk.rhs - chk.tr_m_ph;
    chk.holds = chk.margin >= -tol;
    return chk;
}

}  // namespace cvqkd::channel
