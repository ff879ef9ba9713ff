#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvqkd/bound.hpp"
#include "cvqkd/channel.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace cvqkd;
using channel::ChannelParams;
using finitesize::ProtocolParams;
using povm::FockSpace;

namespace {

ProtocolParams reference(const ChannelParams& ch) {
    ProtocolParams p;
    p.mu = 0.6;
    p.p_sig = 0.8;
    p.p_test = 0.2;
    p.x_th = 0.4;
    p.kappa = 2.0;
    p.gamma = 0.2;
    p.beta = std::sqrt(ch.eta * p.mu);
    return p;
}

}  // namespace

TEST_CASE("channel parameters") {
    CHECK(ChannelParams::from_attenuation_db(3.0, 0.0).eta == doctest::Approx(0.501187).epsilon(1e-6));
    CHECK(ChannelParams{0.25, 0.0}.attenuation_db() == doctest::Approx(6.0206).epsilon(1e-5));
    CHECK_THROWS(ChannelParams{0.0, 0.0}.validate());
    CHECK_THROWS(ChannelParams{0.5, -0.1}.validate());
}

TEST_CASE("expected test statistic") {
    {
        ChannelParams ch{0.37, 0.0};
        const ProtocolParams p = reference(ch);
        CHECK(channel::expected_F(ch, p) == doctest::Approx(p.n_rounds * p.p_test).epsilon(1e-14));
    }
    {
        ChannelParams ch{1.0, 1e-2};
        const ProtocolParams p = reference(ch);
        // plug-in arithmetic oracle for (m, r) = (1, 0.4120)
        const double ratio = 0.005 / (1.0 + 0.4120 * 1.005);
        const double expect = (1.0 / 1.005) * (1.0 - ratio * ratio);
        CHECK(channel::expected_F(ch, p) / (p.n_rounds * p.p_test) ==
              doctest::Approx(expect).epsilon(1e-14));
        // decreasing in xi near zero
        ChannelParams ch2{1.0, 1.1e-2};
        CHECK(channel::expected_F(ch2, reference(ch2)) < channel::expected_F(ch, p));
    }
    {
        ChannelParams ch{0.5, 0.0};
        ProtocolParams p = reference(ch);
        p.beta = 0.123;  // mismatched test reference
        CHECK_THROWS(channel::expected_F(ch, p));
    }
}

TEST_CASE("success probabilities against a direct Gaussian-density integral") {
    {
        ChannelParams ch{0.81, 0.0};
        ProtocolParams p = reference(ch);
        p.x_th = std::sqrt(ch.eta * p.mu);
        const auto [p_plus, p_minus] = channel::success_probs(ch, p);
        CHECK(p_plus == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(p_minus < 0.05);
    }
    {
        ChannelParams ch{0.9, 0.0};
        ProtocolParams p = reference(ch);
        p.x_th = 0.0;
        const auto [p_plus, p_minus] = channel::success_probs(ch, p);
        CHECK(p_plus + p_minus == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        ChannelParams ch{0.1, 0.01};
        ProtocolParams p = reference(ch);
        p.x_th = 0.3;
        const auto [p_plus, p_minus] = channel::success_probs(ch, p);
        // heterodyne real part is Gaussian around +-sqrt(eta mu), variance (2 + xi)/4
        const double mean = std::sqrt(ch.eta * p.mu);
        const double sigma = std::sqrt(0.25 * (2.0 + ch.xi));
        const auto gauss_tail = [&](double mu_sign) {
            return oracles::integrate(
                [&](double x) {
                    const double z = (x - mu_sign) / sigma;
                    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
                },
                p.x_th, p.x_th + 14.0, 128);
        };
        CHECK(p_plus == doctest::Approx(gauss_tail(mean)).epsilon(1e-11));
        CHECK(p_minus == doctest::Approx(gauss_tail(-mean)).epsilon(1e-11));
    }
}

TEST_CASE("error-correction cost") {
    CHECK(channel::ec_cost(1e9, 0.4, 0.0).first == 0.0);
    {
        const auto [h_ec, e_bit] = channel::ec_cost(1e9, 0.2, 0.2);
        CHECK(e_bit == 0.5);
        CHECK(h_ec == doctest::Approx(1.1e9));
    }
    CHECK_THROWS(channel::ec_cost(1e9, 0.0, 0.0));
}

TEST_CASE("joint state: ideal channel gives the pure entangled preparation") {
    ChannelParams ch{1.0, 0.0};
    ProtocolParams p = reference(ch);
    const FockSpace space{40};
    const channel::JointState js = channel::joint_state(ch, p, space);
    CHECK(js.trace_drift < 1e-12);

    // |Psi> = (|0>|b> + |1>|-b>)/sqrt(2) has X blocks built from parity slices
    const linalg::Vector b = povm::coherent_vector(space, std::sqrt(p.mu));
    linalg::Vector b_ev = b, b_od = b;
    for (int n = 0; n < space.dim(); ++n) (n % 2 == 0 ? b_od : b_ev)(n) = 0.0;
    CHECK(linalg::max_abs(js.rho.pp - b_ev * b_ev.transpose()) < 1e-12);
    CHECK(linalg::max_abs(js.rho.mm - b_od * b_od.transpose()) < 1e-12);
    CHECK(linalg::max_abs(js.rho.pm - b_ev * b_od.transpose()) < 1e-12);

    const double q_trace = povm::assemble_pi_minus_sig(space).trace_with(js.rho);
    CHECK(q_trace == doctest::Approx(finitesize::q_minus(p.mu)).epsilon(1e-12));
}

TEST_CASE("joint state: q_- trace is channel-independent") {
    const FockSpace space{40};
    for (const double eta : {1.0, 0.6, 0.25}) {
        for (const double xi : {0.0, 1e-3, 5e-2}) {
            ChannelParams ch{eta, xi};
            ProtocolParams p = reference(ch);
            const channel::JointState js = channel::joint_state(ch, p, space);
            const double q_trace = povm::assemble_pi_minus_sig(space).trace_with(js.rho);
            CHECK(q_trace == doctest::Approx(finitesize::q_minus(p.mu)).epsilon(1e-9));
        }
    }
}

TEST_CASE("joint state: positivity, unit trace, success probability and witness consistency") {
    ChannelParams ch{0.5, 1e-2};
    ProtocolParams p = reference(ch);
    const FockSpace space{40};
    const channel::JointState js = channel::joint_state(ch, p, space);

    const linalg::Matrix full = oracles::full_matrix(js.rho);
    CHECK(linalg::sym_eig_min(full) > -1e-9);
    CHECK(full.trace() == doctest::Approx(1.0).epsilon(1e-13));

    const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
    povm::QubitFockOperator success = povm::QubitFockOperator::zero(space);
    success.pp = sp.m_ev.entries + sp.m_od.entries;
    success.mm = success.pp;
    const auto [p_plus, p_minus] = channel::success_probs(ch, p);
    CHECK(success.trace_with(js.rho) == doctest::Approx(p_plus + p_minus).epsilon(1e-7));

    // conditional pulse state for bit a = 0: Z00 block times two
    const linalg::Matrix rho_c0 = js.rho.pp + js.rho.pm + js.rho.mp + js.rho.mm;
    const linalg::Matrix w = povm::witness_expectation_operator(space, p.witness, p.beta);
    const double e_lambda = rho_c0.cwiseProduct(w).sum();
    const double closed = channel::expected_F(ch, p) / (p.n_rounds * p.p_test);
    CHECK(e_lambda == doctest::Approx(closed).epsilon(1e-5));

    // per-round estimator chain: E[Lambda] <= Tr(Pi_fid rho) and the full
    // combination stays below the dual bound
    const double tr_fid = povm::assemble_pi_fid(space, p.beta).trace_with(js.rho);
    CHECK(e_lambda <= tr_fid + 1e-7);
    const povm::SuccessPovm spb = povm::build_success_povm(space, p.x_th);
    const povm::PovmMoments mom = povm::povm_moments(space, p.beta, spb.m_ev, spb.m_od);
    const bound::DualBound db = bound::dual_bound(mom, p.kappa, p.gamma);
    const double tr_m_ph = povm::assemble_m_ph(space, spb.m_ev, spb.m_od).trace_with(js.rho);
    const double tr_minus = povm::assemble_pi_minus_sig(space).trace_with(js.rho);
    CHECK(tr_m_ph + p.kappa * e_lambda - p.gamma * tr_minus <= db.b_value + 1e-7);
}

TEST_CASE("joint state: noise quadrature is converged at the default order") {
    ChannelParams ch{0.7, 0.1};  // the largest excess noise the order is tuned for
    ProtocolParams p = reference(ch);
    const FockSpace space{40};
    const channel::JointState coarse = channel::joint_state(ch, p, space, 32);
    const channel::JointState fine = channel::joint_state(ch, p, space, 64);
    double gap = 0.0;
    for (const auto block : {&povm::QubitFockOperator::pp, &povm::QubitFockOperator::pm,
                             &povm::QubitFockOperator::mm})
        gap = std::max(gap, linalg::max_abs(coarse.rho.*block - fine.rho.*block));
    CHECK(gap < 1e-10);
    CHECK_THROWS(channel::joint_state(ch, p, space, 1));
}

TEST_CASE("asymptotic phase-error inequality") {
    const FockSpace space{40};
    {
        ChannelParams ch = ChannelParams::from_attenuation_db(2.0, 1e-3);
        ProtocolParams p = reference(ch);
        const channel::JointState js = channel::joint_state(ch, p, space);
        const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
        const povm::PovmMoments mom = povm::povm_moments(space, p.beta, sp.m_ev, sp.m_od);
        const bound::DualBound db = bound::dual_bound(mom, p.kappa, p.gamma);
        const channel::AsymptoticCheck chk = channel::asymptotic_phase_error(
            js.rho, povm::assemble_m_ph(space, sp.m_ev, sp.m_od),
            povm::assemble_pi_fid(space, p.beta), povm::assemble_pi_minus_sig(space), db.b_value,
            p.kappa, p.gamma);
        CHECK(chk.holds);
        CHECK(chk.margin > 0.0);
        // kappa = gamma = 0 reduces to Tr(M_ph rho) <= B(0, 0)
        const bound::DualBound db0 = bound::dual_bound(mom, 0.0, 0.0);
        const channel::AsymptoticCheck chk0 = channel::asymptotic_phase_error(
            js.rho, povm::assemble_m_ph(space, sp.m_ev, sp.m_od),
            povm::assemble_pi_fid(space, p.beta), povm::assemble_pi_minus_sig(space), db0.b_value,
            0.0, 0.0);
        CHECK(chk0.rhs == doctest::Approx(db0.b_value));
        CHECK(chk0.holds);
    }
    {
        // ideal channel with a huge threshold: essentially no phase errors
        ChannelParams ch{1.0, 0.0};
        ProtocolParams p = reference(ch);
        p.x_th = 8.0;
        const channel::JointState js = channel::joint_state(ch, p, space);
        const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
        const double tr_m_ph = povm::assemble_m_ph(space, sp.m_ev, sp.m_od).trace_with(js.rho);
        CHECK(std::abs(tr_m_ph) < 1e-8);
    }
}
