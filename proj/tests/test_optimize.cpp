#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvqkd/optimize.hpp"

#include <cmath>

using namespace cvqkd;
using channel::ChannelParams;
using finitesize::ProtocolParams;

namespace {

ProtocolParams baseline(double n_rounds = 1e11) {
    ProtocolParams p;
    p.n_rounds = n_rounds;
    p.mu = 0.6;
    p.p_sig = 0.8;
    p.p_test = 0.2;
    p.x_th = 0.5;
    p.kappa = 2.0;
    p.gamma = 0.3;
    return p;
}

opt::OptimizationConfig quick_config(std::uint64_t seed) {
    opt::OptimizationConfig cfg;
    cfg.seed = seed;
    cfg.restarts = 2;
    cfg.max_evals = 220;
    cfg.n_max = 40;
    return cfg;
}

}  // namespace

TEST_CASE("evaluate_rate: basic behaviors") {
    ChannelParams ch{1.0, 0.0};
    {
        // asymptotic per-pulse gain is independent of N
        ProtocolParams p = baseline(1e9);
        p.kappa = 20.0;
        p.gamma = 2.0;
        p.x_th = 0.7;
        opt::RateOptions asym;
        asym.asymptotic = true;
        asym.n_max = 40;
        const double g1 = opt::evaluate_rate(ch, p, asym).gain;
        p.n_rounds = 2e9;
        const double g2 = opt::evaluate_rate(ch, p, asym).gain;
        CHECK(g1 == doctest::Approx(g2).epsilon(1e-14));
        CHECK(g1 > 0.0);  // ideal channel at a sensible point must yield key
    }
    {
        // absurd threshold: nothing succeeds, gain cannot be positive
        ProtocolParams p = baseline();
        p.x_th = 11.0;
        const finitesize::KeyRateReport rep = opt::evaluate_rate(ch, p, {40, false});
        CHECK(rep.n_suc < 1.0);
        CHECK(rep.gain <= 0.0);
    }
    {
        // stage tags propagate with errors (cutoff above the moment capacity)
        try {
            opt::evaluate_rate(ch, baseline(), {200, false});
            FAIL("expected an exception");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("evaluate_rate[") != std::string::npos);
        }
    }
}

TEST_CASE("optimize_point finds a positive finite-size rate at 0 dB") {
    ChannelParams ch{1.0, 0.0};
    const opt::OptimizeResult res = opt::optimize_point(ch, baseline(), quick_config(3));
    CHECK(res.report.gain > 0.0);
    CHECK(res.evals > 0);

    // bounds respected after the inverse transforms
    const opt::OptimizationConfig cfg = quick_config(3);
    CHECK(res.params.mu >= cfg.mu.lo);
    CHECK(res.params.mu <= cfg.mu.hi);
    CHECK(res.params.p_sig >= cfg.p_sig.lo);
    CHECK(res.params.p_sig <= cfg.p_sig.hi);
    CHECK(res.params.x_th >= cfg.x_th.lo);
    CHECK(res.params.x_th <= cfg.x_th.hi);
    CHECK(res.params.kappa >= cfg.kappa.lo);
    CHECK(res.params.kappa <= cfg.kappa.hi);
    CHECK(res.params.gamma >= cfg.gamma.lo);
    CHECK(res.params.gamma <= cfg.gamma.hi);
    CHECK(res.params.p_sig + res.params.p_test == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.params.beta == doctest::Approx(std::sqrt(ch.eta * res.params.mu)).epsilon(1e-14));

    // the inner search can never do worse than the fixed (0.5, 0.5) reference
    ProtocolParams ref = res.params;
    ref.kappa = 0.5;
    ref.gamma = 0.5;
    const finitesize::KeyRateReport at_ref = opt::evaluate_rate(ch, ref, {40, false});
    CHECK(res.report.u_of_f <= at_ref.u_of_f + 1e-6 * std::abs(at_ref.u_of_f));

    // idempotence: restarting from the optimum moves the gain by < 1e-6 relative
    opt::OptimizationConfig again = quick_config(4);
    again.restarts = 1;
    const opt::OptimizeResult res2 = opt::optimize_point(ch, res.params, again);
    CHECK(res2.report.gain >= res.report.gain * (1.0 - 1e-6));
}

TEST_CASE("more excess noise never helps") {
    double prev = 1e300;
    for (const double xi : {0.0, 1e-3, 1e-2}) {
        ChannelParams ch{1.0, xi};
        const opt::OptimizeResult res = opt::optimize_point(ch, baseline(), quick_config(6));
        CHECK(res.report.gain <= prev * 1.05 + 1e-12);
        prev = res.report.gain;
    }
}

TEST_CASE("noiseless curves stay positive over a strictly larger attenuation range") {
    opt::OptimizationConfig cfg;
    cfg.seed = 2;
    cfg.restarts = 2;
    cfg.max_evals = 200;
    cfg.n_max = 40;
    cfg.asymptotic = true;
    const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
    const auto reach = [&](double xi) {
        const auto rows = opt::sweep(grid, xi, 1e11, baseline(), cfg);
        size_t last = 0;
        for (size_t i = 0; i < rows.size(); ++i)
            if (rows[i].key_rate > 0.0) last = i;
        return last;
    };
    const size_t reach_clean = reach(0.0);
    const size_t reach_noisy = reach(1e-2);
    CHECK(reach_clean == grid.size() - 1);
    CHECK(reach_clean > reach_noisy);
}

TEST_CASE("sweep: empty grid, reproducibility, monotone trend") {
    const opt::OptimizationConfig cfg = [] {
        opt::OptimizationConfig c;
        c.seed = 11;
        c.restarts = 1;
        c.max_evals = 150;
        c.n_max = 40;
        c.asymptotic = true;
        return c;
    }();

    CHECK(opt::sweep({}, 0.0, 1e11, baseline(), cfg).empty());

    const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
    const auto rows1 = opt::sweep(grid, 0.0, 1e11, baseline(), cfg);
    const auto rows2 = opt::sweep(grid, 0.0, 1e11, baseline(), cfg);
    REQUIRE(rows1.size() == 4);
    for (size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].error.empty());
        CHECK(rows1[i].key_rate == rows2[i].key_rate);  // bit-for-bit reproducible
        CHECK(rows1[i].mu == rows2[i].mu);
        CHECK(rows1[i].kappa == rows2[i].kappa);
        CHECK(rows1[i].eta == doctest::Approx(std::pow(10.0, -grid[i] / 10.0)).epsilon(1e-15));
    }
    for (size_t i = 1; i < rows1.size(); ++i)
        CHECK(rows1[i].key_rate <= rows1[i - 1].key_rate * 1.05 + 1e-12);
    CHECK(rows1[0].key_rate > 0.0);

    // worker count must not change the result
    opt::OptimizationConfig serial = cfg;
    serial.workers = 1;
    opt::OptimizationConfig pooled = cfg;
    pooled.workers = 3;
    const auto rows_serial = opt::sweep(grid, 0.0, 1e11, baseline(), serial);
    const auto rows_pooled = opt::sweep(grid, 0.0, 1e11, baseline(), pooled);
    for (size_t i = 0; i < grid.size(); ++i) {
        CHECK(rows_serial[i].key_rate == rows_pooled[i].key_rate);
        CHECK(rows_serial[i].mu == rows_pooled[i].mu);
        CHECK(rows_serial[i].x_th == rows_pooled[i].x_th);
    }
}
