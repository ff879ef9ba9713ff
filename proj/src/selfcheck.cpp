#include "cvqkd/selfcheck.hpp"

#include "cvqkd/bound.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/finitesize.hpp"
#include "cvqkd/mathkit.hpp"
#include "cvqkd/povm.hpp"
#include "cvqkd/sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cvqkd::check {

namespace {

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

finitesize::ProtocolParams reference_params() {
    finitesize::ProtocolParams p;
    p.n_rounds = 1e11;
    p.mu = 0.6;
    p.p_sig = 0.8;
    p.p_test = 0.2;
    p.x_th = 0.4;
    p.kappa = 2.0;
    p.gamma = 0.2;
    return p;
}

linalg::Matrix random_density(int dim, std::mt19937_64& gen) {
    linalg::Matrix a(dim, dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = normal(gen);
    linalg::Matrix rho = a * a.transpose();
    rho /= rho.trace();
    return rho;
}

}  // namespace

std::vector<CheckResult> run_suite(const SuiteConfig& cfg) {
    std::vector<CheckResult> out;
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const povm::FockSpace space{cfg.n_max};
    const math::WitnessParams witness;  // (1, 0.4120)

    {  // security-level identity at the reference parameters
        CheckResult c;
        c.name = "security-level-identity";
        const double level = finitesize::security_level(std::exp2(-104), 104, 51);
        c.lhs = level;
        c.rhs = std::exp2(-50);
        c.margin = -std::abs(level - c.rhs);
        c.passed = level == c.rhs;
        out.push_back(c);
    }
    {  // witness extrema against the published reference values
        CheckResult c;
        c.name = "witness-extrema-reference";
        const math::WitnessExtrema ext = math::witness_extrema(witness);
        c.lhs = ext.lambda_max;
        c.rhs = ext.lambda_min;
        const double err = std::max(std::abs(ext.lambda_max - 2.824), std::abs(ext.lambda_min + 0.9932));
        c.margin = 1e-3 - err;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // witness values stay inside the computed extrema on a dense grid
        CheckResult c;
        c.name = "witness-range-grid";
        const math::WitnessExtrema ext = math::witness_extrema(witness);
        double worst = 0.0;
        for (int i = 0; i <= 200000; ++i) {
            const double nu = 200.0 * i / 200000.0;
            const double v = math::lambda_witness(witness, nu);
            worst = std::max({worst, v - ext.lambda_max, ext.lambda_min - v});
        }
        c.lhs = worst;
        c.rhs = 1e-9;
        c.margin = c.rhs - worst;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // POVM completeness at x_th = 0
        CheckResult c;
        c.name = "povm-completeness-xth0";
        const povm::SuccessPovm sp = povm::build_success_povm(space, 0.0);
        const linalg::Matrix defect = sp.m_ev.entries + sp.m_od.entries -
                                      linalg::Matrix::Identity(space.dim(), space.dim());
        c.lhs = linalg::max_abs(defect);
        c.rhs = 1e-8;
        c.margin = c.rhs - c.lhs;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // analytic parity weights of the coherent reference state
        CheckResult c;
        c.name = "coherent-moments-analytic";
        const povm::SuccessPovm sp = povm::build_success_povm(space, 0.5);
        const povm::PovmMoments mom = povm::povm_moments(space, 0.8, sp.m_ev, sp.m_od);
        c.lhs = std::abs(mom.c_ev + mom.c_od - 1.0);
        c.rhs = 1e-12;
        c.margin = c.rhs - c.lhs;
        c.passed = c.margin >= 0.0;
        c.detail = "c_ev=" + format_double(mom.c_ev);
        out.push_back(c);
    }
    {  // POVM elements are positive with spectrum below one
        CheckResult c;
        c.name = "povm-psd-random";
        double worst = 0.0;
        for (int k = 0; k < 6; ++k) {
            const povm::SuccessPovm sp = povm::build_success_povm(space, 3.0 * uni(gen));
            for (const auto* op : {&sp.m_ev, &sp.m_od}) {
                const linalg::Vector ev = linalg::sym_eigenvalues(op->entries);
                worst = std::max({worst, -ev(0), ev(ev.size() - 1) - 1.0});
            }
        }
        c.lhs = worst;
        c.rhs = 1e-9;
        c.margin = c.rhs - worst;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // operator inequality sup(M[kappa, gamma]) <= B(kappa, gamma)
        CheckResult c;
        c.name = "operator-inequality-random";
        double worst = -1e300;
        for (int k = 0; k < cfg.operator_samples; ++k) {
            const double beta = 0.2 + 1.3 * uni(gen);
            const double x_th = 2.0 * uni(gen);
            const double kappa = 5.0 * uni(gen);
            const double gamma = 5.0 * uni(gen);
            const povm::SuccessPovm sp = povm::build_success_povm(space, x_th);
            const povm::PovmMoments mom = povm::povm_moments(space, beta, sp.m_ev, sp.m_od);
            bound::DualBound db = bound::dual_bound(mom, kappa, gamma);
            db.b_value *= cfg.b_scale;
            const povm::QubitFockOperator m = povm::assemble_M(space, beta, kappa, gamma, sp.m_ev, sp.m_od);
            const bound::InequalityReport rep = bound::verify_operator_inequality(m, db);
            worst = std::max(worst, rep.sup_m - rep.b_value);
        }
        c.lhs = worst;
        c.rhs = 1e-7;
        c.margin = c.rhs - worst;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // witness expectation never exceeds the fidelity on random states
        CheckResult c;
        c.name = "fidelity-witness-random-states";
        const double beta = 0.8;
        const linalg::Matrix w = povm::witness_expectation_operator(space, witness, beta);
        const linalg::Vector b = povm::coherent_vector(space, beta);
        const linalg::Matrix gap = w - b * b.transpose();
        double worst = -1e300;
        for (int k = 0; k < cfg.state_samples; ++k) {
            const linalg::Matrix rho = random_density(space.dim(), gen);
            worst = std::max(worst, rho.cwiseProduct(gap).sum());
        }
        c.lhs = worst;
        c.rhs = 1e-6;
        c.margin = c.rhs - worst;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // joint state reproduces q_- and the analytic success probability
        CheckResult c;
        c.name = "joint-state-traces";
        finitesize::ProtocolParams p = reference_params();
        channel::ChannelParams ch = channel::ChannelParams::from_attenuation_db(2.0, 1e-3);
        p.beta = std::sqrt(ch.eta * p.mu);
        const channel::JointState js = channel::joint_state(ch, p, space);
        const double q_trace = povm::assemble_pi_minus_sig(space).trace_with(js.rho);
        const double q_err = std::abs(q_trace - finitesize::q_minus(p.mu));
        const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
        povm::QubitFockOperator suc = povm::QubitFockOperator::zero(space);
        suc.pp = sp.m_ev.entries + sp.m_od.entries;
        suc.mm = suc.pp;
        const auto [p_plus, p_minus] = channel::success_probs(ch, p);
        const double suc_err = std::abs(suc.trace_with(js.rho) - (p_plus + p_minus));
        c.lhs = std::max(q_err, suc_err);
        c.rhs = 1e-7;
        c.margin = c.rhs - c.lhs;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // honest-channel trace inequality with the dual bound
        CheckResult c;
        c.name = "asymptotic-phase-error-honest";
        finitesize::ProtocolParams p = reference_params();
        channel::ChannelParams ch = channel::ChannelParams::from_attenuation_db(2.0, 1e-3);
        p.beta = std::sqrt(ch.eta * p.mu);
        const channel::JointState js = channel::joint_state(ch, p, space);
        const povm::SuccessPovm sp = povm::build_success_povm(space, p.x_th);
        const povm::PovmMoments mom = povm::povm_moments(space, p.beta, sp.m_ev, sp.m_od);
        const bound::DualBound db = bound::dual_bound(mom, p.kappa, p.gamma);
        const channel::AsymptoticCheck chk = channel::asymptotic_phase_error(
            js.rho, povm::assemble_m_ph(space, sp.m_ev, sp.m_od), povm::assemble_pi_fid(space, p.beta),
            povm::assemble_pi_minus_sig(space), db.b_value, p.kappa, p.gamma);
        c.lhs = chk.tr_m_ph;
        c.rhs = chk.rhs;
        c.margin = chk.margin;
        c.passed = chk.holds;
        out.push_back(c);
    }
    {  // deviation-term inversion residual
        CheckResult c;
        c.name = "delta2-inversion-residual";
        double worst = 0.0;
        for (const double n : {1e6, 1e9, 1e11}) {
            for (const double p : {1e-3, 0.1, 0.4}) {
                for (const double le : {-10.0, -104.0}) {
                    const double eps = std::exp2(le);
                    const double d2 = finitesize::delta_two(n, 1.0, p, eps);
                    if (d2 >= (1.0 - p) * n) continue;
                    const double target = -std::log(eps) / n;
                    const double resid = std::abs(math::kl_bernoulli_shift(p, d2 / n) - target) / target;
                    worst = std::max(worst, resid);
                }
            }
        }
        c.lhs = worst;
        c.rhs = 1e-12;
        c.margin = c.rhs - worst;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    {  // simulator statistics against the closed-form expectations
        CheckResult c;
        c.name = "simulator-vs-analytic";
        finitesize::ProtocolParams p = reference_params();
        p.n_rounds = static_cast<double>(cfg.sim_rounds);
        channel::ChannelParams ch{0.5, 1e-2};
        p.beta = std::sqrt(ch.eta * p.mu);
        const sim::SimTally tally = sim::run_protocol(ch, p, cfg.seed);
        const channel::ChannelExpectations ex = channel::expectations(ch, p);
        // five-sigma comparisons with binomial / witness-range scales
        const double n = p.n_rounds;
        const double suc_frac = static_cast<double>(tally.n_suc) / (n * p.p_sig);
        const double sigma_suc = std::sqrt(ex.e_n_suc_per_signal * (1.0 - ex.e_n_suc_per_signal) /
                                           (n * p.p_sig));
        const math::WitnessExtrema& ext = math::witness_extrema_cached(p.witness);
        const double f_mean = tally.f_hat / static_cast<double>(tally.n_test);
        const double sigma_f = (ext.lambda_max - ext.lambda_min) /
                               std::sqrt(static_cast<double>(tally.n_test));
        const double dev = std::max(std::abs(suc_frac - ex.e_n_suc_per_signal) / sigma_suc,
                                    std::abs(f_mean - ex.e_f_per_test) / sigma_f);
        c.lhs = dev;
        c.rhs = 5.0;
        c.margin = c.rhs - dev;
        c.passed = c.margin >= 0.0;
        out.push_back(c);
    }
    return out;
}

}  // namespace cvqkd::check
