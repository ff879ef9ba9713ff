#include "cvqkd/optimize.hpp"

#include "cvqkd/bound.hpp"
#include "cvqkd/parallel.hpp"
#include "cvqkd/povm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cvqkd::opt {

namespace {

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double logit(double u) {
    u = std::clamp(u, 1e-12, 1.0 - 1e-12);
    return std::log(u / (1.0 - u));
}

// affine bound-enforcing transform
double to_bounded(double t, const Bounds& b) { return b.lo + (b.hi - b.lo) * logistic(t); }
double from_bounded(double x, const Bounds& b) { return logit((x - b.lo) / (b.hi - b.lo)); }

// log-scaled transform for mu
double to_log_bounded(double t, const Bounds& b) {
    const double llo = std::log(b.lo), lhi = std::log(b.hi);
    return std::exp(llo + (lhi - llo) * logistic(t));
}
double from_log_bounded(double x, const Bounds& b) {
    const double llo = std::log(b.lo), lhi = std::log(b.hi);
    return logit((std::log(x) - llo) / (lhi - llo));
}

struct NmResult {
    std::vector<double> x;
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& x0, double step, int max_evals, double f_tol,
                     double x_tol) {
    const size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
    int evals = 0;
    for (size_t i = 0; i <= n; ++i) fs[i] = (++evals, f(xs[i]));

    std::vector<size_t> order(n + 1);
    NmResult res;
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        const size_t best = order[0], worst = order[n], second = order[n - 1];

        double diam = 0.0;
        for (size_t i = 0; i <= n; ++i)
            for (size_t d = 0; d < n; ++d) diam = std::max(diam, std::abs(xs[i][d] - xs[best][d]));
        if (std::abs(fs[worst] - fs[best]) < f_tol && diam < x_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / static_cast<double>(n);
        }
        const auto blend = [&](double coeff) {
            std::vector<double> x(n);
            for (size_t d = 0; d < n; ++d) x[d] = centroid[d] + coeff * (xs[worst][d] - centroid[d]);
            return x;
        };

        const std::vector<double> xr = blend(-1.0);
        const double fr = (++evals, f(xr));
        if (fr < fs[best]) {
            const std::vector<double> xe = blend(-2.0);
            const double fe = (++evals, f(xe));
            if (fe < fr) { xs[worst] = xe; fs[worst] = fe; }
            else { xs[worst] = xr; fs[worst] = fr; }
        } else if (fr < fs[second]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            const bool outside = fr < fs[worst];
            const std::vector<double> xc = blend(outside ? -0.5 : 0.5);
            const double fc = (++evals, f(xc));
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                for (size_t i = 0; i <= n; ++i) {  // shrink toward the best vertex
                    if (i == best) continue;
                    for (size_t d = 0; d < n; ++d) xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
                    fs[i] = (++evals, f(xs[i]));
                }
            }
        }
    }
    const size_t best = static_cast<size_t>(
        std::min_element(fs.begin(), fs.end()) - fs.begin());
    res.x = xs[best];
    res.f = fs[best];
    res.evals = evals;
    return res;
}

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// standard-specified engine, raw draws only, so results are portable
struct SeededUniform {
    std::mt19937_64 gen;
    explicit SeededUniform(std::uint64_t seed) : gen(seed) {}
    double next() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

// Everything that depends on (mu, p_sig, x_th) but not on (kappa, gamma).
struct OuterPoint {
    povm::PovmMoments moments;
    channel::ChannelExpectations expect;
    finitesize::ProtocolParams params;  // beta set, kappa/gamma pending
    double delta2 = 0.0;                // at eps/2; independent of kappa, gamma
};

struct InnerBest {
    double kappa = 0.5, gamma = 0.5;
    double u = 0.0;
    int evals = 0;
};

double u_at(const OuterPoint& pt, const math::WitnessExtrema& ext, bool asymptotic, double kappa,
            double gamma) {
    const finitesize::ProtocolParams& p = pt.params;
    const bound::DualBound db = bound::dual_bound(pt.moments, kappa, gamma);
    finitesize::ProtocolParams q = p;
    q.kappa = kappa;
    q.gamma = gamma;
    const auto [c_min, c_max] = finitesize::c_range(q, ext);
    const double d1 = asymptotic ? 0.0 : finitesize::delta_one(p.n_rounds, c_min, c_max, 0.5 * p.epsilon);
    const double d2 = asymptotic ? 0.0 : pt.delta2;
    const double f_hat = pt.expect.e_f_per_test * p.n_rounds * p.p_test;
    return -kappa * (p.p_sig / p.p_test) * f_hat +
           gamma * (p.n_rounds * p.p_sig * finitesize::q_minus(p.mu) + d2) +
           p.p_sig * (p.n_rounds * db.b_value + d1);
}

InnerBest minimize_u(const OuterPoint& pt, const math::WitnessExtrema& ext,
                     const OptimizationConfig& cfg, SeededUniform& rng,
                     const std::vector<std::pair<double, double>>& extra_starts) {
    const auto objective = [&](const std::vector<double>& t) {
        return u_at(pt, ext, cfg.asymptotic, to_bounded(t[0], cfg.kappa), to_bounded(t[1], cfg.gamma));
    };

    const double k_ref = std::clamp(0.5, cfg.kappa.lo, cfg.kappa.hi);
    const double g_ref = std::clamp(0.5, cfg.gamma.lo, cfg.gamma.hi);
    std::vector<std::pair<double, double>> starts = {{k_ref, g_ref}};  // fixed reference point
    for (const auto& s : extra_starts) starts.push_back(s);
    for (int k = 0; k < cfg.inner_restarts; ++k)
        starts.emplace_back(cfg.kappa.lo + (cfg.kappa.hi - cfg.kappa.lo) * rng.next() * 0.25,
                            cfg.gamma.lo + (cfg.gamma.hi - cfg.gamma.lo) * rng.next() * 0.25);

    InnerBest best;
    best.kappa = k_ref;
    best.gamma = g_ref;
    best.u = u_at(pt, ext, cfg.asymptotic, k_ref, g_ref);  // fallback, kept even if NM stalls
    for (const auto& [k0, g0] : starts) {
        const std::vector<double> t0 = {from_bounded(std::clamp(k0, cfg.kappa.lo + 1e-9, cfg.kappa.hi - 1e-9), cfg.kappa),
                                        from_bounded(std::clamp(g0, cfg.gamma.lo + 1e-9, cfg.gamma.hi - 1e-9), cfg.gamma)};
        const NmResult nm = nelder_mead(objective, t0, 0.5, cfg.inner_max_evals, cfg.f_tol, cfg.x_tol);
        best.evals += nm.evals;
        if (nm.f < best.u) {
            best.u = nm.f;
            best.kappa = to_bounded(nm.x[0], cfg.kappa);
            best.gamma = to_bounded(nm.x[1], cfg.gamma);
        }
    }
    return best;
}

OuterPoint make_outer_point(const channel::ChannelParams& ch, const finitesize::ProtocolParams& base,
                            const povm::FockSpace& space, double mu, double p_sig, double x_th,
                            bool asymptotic) {
    OuterPoint pt;
    pt.params = base;
    pt.params.mu = mu;
    pt.params.p_sig = p_sig;
    pt.params.p_test = 1.0 - p_sig;
    pt.params.x_th = x_th;
    // the moment reduction needs both parity components of |beta> nonzero
    pt.params.beta = std::max(std::sqrt(ch.eta * mu), 1e-6);
    const povm::SuccessPovm sp = povm::build_success_povm(space, x_th);
    pt.moments = povm::povm_moments(space, pt.params.beta, sp.m_ev, sp.m_od);
    pt.expect = channel::expectations(ch, pt.params);
    pt.delta2 = asymptotic ? 0.0
                           : finitesize::delta_two(pt.params.n_rounds, p_sig,
                                                   finitesize::q_minus(mu), 0.5 * pt.params.epsilon);
    return pt;
}

finitesize::KeyRateReport report_for(const OuterPoint& pt, double kappa, double gamma,
                                     bool asymptotic) {
    finitesize::ProtocolParams p = pt.params;
    p.kappa = kappa;
    p.gamma = gamma;
    const bound::DualBound db = bound::dual_bound(pt.moments, kappa, gamma);
    const double f_hat = pt.expect.e_f_per_test * p.n_rounds * p.p_test;
    const double n_suc = p.n_rounds * p.p_sig * pt.expect.e_n_suc_per_signal;
    return finitesize::assemble_report(p, db.b_value, db.attained_branch, f_hat, n_suc,
                                       pt.expect.e_bit, asymptotic);
}

// Search objective: the true gain where a key exists, otherwise a smooth
// descent direction through the zero-key plateau (the clamped gain is flat
// there and stalls the simplex).
double soft_gain(const OuterPoint& pt, const finitesize::KeyRateReport& rep, bool asymptotic) {
    if (rep.n_fin > 0.0) return rep.gain;
    const finitesize::ProtocolParams& p = pt.params;
    const double s_cost = asymptotic ? 0.0 : static_cast<double>(p.s);
    const double s_prime_cost = asymptotic ? 0.0 : static_cast<double>(p.s_prime);
    if (!(rep.n_suc > 0.0)) return -10.0 - 0.1 * p.x_th;
    const double ratio = std::max(rep.u_of_f, 0.0) / rep.n_suc;
    if (ratio < 0.5) {
        const double n_fin = rep.n_suc * (1.0 - math::binary_entropy(ratio)) - s_cost;
        return (n_fin - rep.h_ec - s_prime_cost) / p.n_rounds;  // negative, but sloped
    }
    return (-rep.n_suc - rep.h_ec - s_prime_cost) / p.n_rounds - (std::min(ratio, 10.0) - 0.5);
}

}  // namespace

void OptimizationConfig::validate() const {
    const auto ordered = [](const Bounds& b) { return std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi; };
    if (!ordered(mu) || !(mu.lo > 0.0)) throw std::invalid_argument("optimize: mu bounds must be ordered and positive");
    if (!ordered(p_sig) || !(p_sig.lo > 0.0) || !(p_sig.hi < 1.0))
        throw std::invalid_argument("optimize: p_sig bounds must lie inside (0, 1)");
    if (!ordered(x_th) || x_th.lo < 0.0) throw std::invalid_argument("optimize: x_th bounds must be ordered and nonnegative");
    if (!ordered(kappa) || kappa.lo < 0.0) throw std::invalid_argument("optimize: kappa bounds must be ordered and nonnegative");
    if (!ordered(gamma) || gamma.lo < 0.0) throw std::invalid_argument("optimize: gamma bounds must be ordered and nonnegative");
    if (restarts < 1 || inner_restarts < 0) throw std::invalid_argument("optimize: restart counts invalid");
    if (max_evals < 10 || inner_max_evals < 10) throw std::invalid_argument("optimize: evaluation budgets too small");
}

finitesize::KeyRateReport evaluate_rate(const channel::ChannelParams& ch,
                                        const finitesize::ProtocolParams& p,
                                        const RateOptions& opts) {
    ch.validate();
    finitesize::ProtocolParams q = p;
    q.beta = std::max(std::sqrt(ch.eta * p.mu), 1e-6);
    q.validate();
    const povm::FockSpace space{opts.n_max > 0 ? opts.n_max
                                               : povm::FockSpace::recommended_cutoff(q.beta)};
    const auto wrap = [](const char* stage, const auto& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("evaluate_rate[") + stage + "]: " + e.what());
        }
    };
    const povm::SuccessPovm sp = wrap("povm", [&] { return povm::build_success_povm(space, q.x_th); });
    const povm::PovmMoments mom =
        wrap("moments", [&] { return povm::povm_moments(space, q.beta, sp.m_ev, sp.m_od); });
    const bound::DualBound db = wrap("bound", [&] { return bound::dual_bound(mom, q.kappa, q.gamma); });
    const channel::ChannelExpectations ex = wrap("channel", [&] { return channel::expectations(ch, q); });
    return wrap("finitesize", [&] {
        const double f_hat = ex.e_f_per_test * q.n_rounds * q.p_test;
        const double n_suc = q.n_rounds * q.p_sig * ex.e_n_suc_per_signal;
        return finitesize::assemble_report(q, db.b_value, db.attained_branch, f_hat, n_suc, ex.e_bit,
                                           opts.asymptotic);
    });
}

OptimizeResult optimize_point(const channel::ChannelParams& ch,
                              const finitesize::ProtocolParams& fixed,
                              const OptimizationConfig& cfg) {
    ch.validate();
    cfg.validate();
    const math::WitnessExtrema& ext = math::witness_extrema_cached(fixed.witness);
    // one cutoff for the whole search keeps the objective continuous in mu
    const povm::FockSpace space{cfg.n_max > 0
                                    ? cfg.n_max
                                    : povm::FockSpace::recommended_cutoff(std::sqrt(ch.eta * cfg.mu.hi))};
    SeededUniform rng(mix64(cfg.seed));

    OptimizeResult result;
    double best_score = -std::numeric_limits<double>::infinity();
    long total_evals = 0;
    std::vector<std::pair<double, double>> inner_hint = {{fixed.kappa, fixed.gamma}};

    const auto outer_objective = [&](const std::vector<double>& t) {
        const double mu = to_log_bounded(t[0], cfg.mu);
        const double p_sig = to_bounded(t[1], cfg.p_sig);
        const double x_th = to_bounded(t[2], cfg.x_th);
        const OuterPoint pt = make_outer_point(ch, fixed, space, mu, p_sig, x_th, cfg.asymptotic);
        SeededUniform inner_rng(mix64(cfg.seed ^ 0x517cc1b727220a95ULL));
        const InnerBest inner = minimize_u(pt, ext, cfg, inner_rng, inner_hint);
        total_evals += inner.evals + 1;
        const finitesize::KeyRateReport rep = report_for(pt, inner.kappa, inner.gamma, cfg.asymptotic);
        const double score = soft_gain(pt, rep, cfg.asymptotic);
        if (score > best_score) {
            best_score = score;
            result.report = rep;
            result.params = pt.params;
            result.params.kappa = inner.kappa;
            result.params.gamma = inner.gamma;
        }
        return -score;
    };

    std::vector<std::array<double, 3>> starts;
    starts.push_back({std::clamp(fixed.mu, cfg.mu.lo * 1.0000001, cfg.mu.hi * 0.9999999),
                      std::clamp(fixed.p_sig, cfg.p_sig.lo + 1e-6, cfg.p_sig.hi - 1e-6),
                      std::clamp(fixed.x_th, cfg.x_th.lo + 1e-6, cfg.x_th.hi - 1e-6)});
    for (int k = 1; k < cfg.restarts; ++k) {
        const double u0 = rng.next(), u1 = rng.next(), u2 = rng.next();
        starts.push_back({std::exp(std::log(cfg.mu.lo) + (std::log(cfg.mu.hi) - std::log(cfg.mu.lo)) * u0),
                          cfg.p_sig.lo + (cfg.p_sig.hi - cfg.p_sig.lo) * u1,
                          cfg.x_th.lo + (cfg.x_th.hi - cfg.x_th.lo) * u2});
    }

    bool converged = false;
    for (const auto& s : starts) {
        const std::vector<double> t0 = {from_log_bounded(s[0], cfg.mu), from_bounded(s[1], cfg.p_sig),
                                        from_bounded(s[2], cfg.x_th)};
        const NmResult nm = nelder_mead(outer_objective, t0, 0.6, cfg.max_evals, cfg.f_tol, cfg.x_tol);
        total_evals += nm.evals;
        converged = converged || nm.converged;
        inner_hint = {{result.params.kappa, result.params.gamma}};
    }
    result.converged = converged;
    result.evals = total_evals;
    return result;
}

std::vector<SweepRow> sweep(const std::vector<double>& atten_db_grid, double xi, double n_rounds,
                            const finitesize::ProtocolParams& fixed, const OptimizationConfig& cfg) {
    cfg.validate();
    std::vector<SweepRow> rows(atten_db_grid.size());
    if (atten_db_grid.empty()) return rows;

    std::vector<OptimizeResult> results(atten_db_grid.size());
    std::vector<char> failed(atten_db_grid.size(), 0);

    const auto fill_row = [&](size_t i) {
        SweepRow& row = rows[i];
        row.atten_db = atten_db_grid[i];
        row.xi = xi;
        row.n_rounds = n_rounds;
        row.eta = std::pow(10.0, -atten_db_grid[i] / 10.0);
        if (failed[i]) return;
        const OptimizeResult& r = results[i];
        row.mu = r.params.mu;
        row.p_sig = r.params.p_sig;
        row.x_th = r.params.x_th;
        row.kappa = r.params.kappa;
        row.gamma = r.params.gamma;
        row.b_value = r.report.b_value;
        row.u_value = r.report.u_of_f;
        row.n_suc = r.report.n_suc;
        row.h_ec = r.report.h_ec;
        row.gain = r.report.gain;
        row.key_rate = std::max(r.report.gain, 0.0);
    };

    const auto optimize_index = [&](size_t i, const finitesize::ProtocolParams& hint,
                                    const OptimizationConfig& point_cfg) {
        channel::ChannelParams ch = channel::ChannelParams::from_attenuation_db(atten_db_grid[i], xi);
        return optimize_point(ch, hint, point_cfg);
    };

    // phase 1: cold pass, pure per index
    parallel::for_each_index(atten_db_grid.size(), cfg.workers, [&](std::uint64_t i) {
        finitesize::ProtocolParams hint = fixed;
        hint.n_rounds = n_rounds;
        OptimizationConfig point_cfg = cfg;
        point_cfg.seed = mix64(cfg.seed ^ (0x100 + i));
        try {
            results[i] = optimize_index(static_cast<size_t>(i), hint, point_cfg);
        } catch (const std::exception& e) {
            failed[i] = 1;
            rows[i].error = e.what();
        }
    });

    // phase 2: sequential warm-start polish, forward then backward
    const auto polish = [&](size_t i, size_t neighbor) {
        if (failed[i] || failed[neighbor]) return;
        OptimizationConfig point_cfg = cfg;
        point_cfg.restarts = 1;
        point_cfg.seed = mix64(cfg.seed ^ (0x9000 + i));
        finitesize::ProtocolParams hint = results[neighbor].params;
        hint.n_rounds = n_rounds;
        try {
            OptimizeResult warm = optimize_index(i, hint, point_cfg);
            if (warm.report.gain > results[i].report.gain) results[i] = warm;
        } catch (const std::exception&) {
            // keep the cold result
        }
    };
    for (size_t i = 1; i < atten_db_grid.size(); ++i) polish(i, i - 1);
    for (size_t i = atten_db_grid.size() - 1; i-- > 0;) polish(i, i + 1);

    for (size_t i = 0; i < rows.size(); ++i) fill_row(i);
    return rows;
}

}  // namespace cvqkd::opt
