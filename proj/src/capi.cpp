#include "cvqkd.h"

#include "cvqkd/channel.hpp"
#include "cvqkd/finitesize.hpp"
#include "cvqkd/optimize.hpp"
#include "cvqkd/povm.hpp"
#include "cvqkd/selfcheck.hpp"
#include "cvqkd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <new>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

int run_guarded(const std::function<int()>& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const std::invalid_argument& e) {
        return fail(CVQKD_ERR_DOMAIN, e.what());
    } catch (const std::exception& e) {
        return fail(CVQKD_ERR_NUMERIC, e.what());
    } catch (...) {
        return fail(CVQKD_ERR_INTERNAL, "unknown error");
    }
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "protocol.n_rounds", "protocol.mu", "protocol.p_sig", "protocol.beta", "protocol.s",
        "protocol.s_prime", "protocol.kappa", "protocol.gamma", "protocol.m", "protocol.r",
        "protocol.x_th", "protocol.epsilon", "protocol.epsilon_log2",
        "channel.eta", "channel.attenuation_db", "channel.xi",
        "engine.n_max", "engine.asymptotic", "engine.workers",
        "optimize.mu_lo", "optimize.mu_hi", "optimize.p_sig_lo", "optimize.p_sig_hi",
        "optimize.x_th_lo", "optimize.x_th_hi", "optimize.kappa_lo", "optimize.kappa_hi",
        "optimize.gamma_lo", "optimize.gamma_hi", "optimize.restarts", "optimize.inner_restarts",
        "optimize.f_tol", "optimize.x_tol", "optimize.max_evals", "optimize.inner_max_evals",
        "optimize.seed",
        "sweep.db_start", "sweep.db_stop", "sweep.db_step",
        "sim.seed", "sim.two_stage",
        "verify.seed", "verify.n_max", "verify.operator_samples", "verify.state_samples",
        "verify.sim_rounds", "verify.b_scale",
    };
    return keys;
}

}  // namespace

struct cvqkd_opts {
    std::map<std::string, double> values;

    double get(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return values.count(key) > 0; }
};

struct cvqkd_table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> notes;

    void add_row(const std::vector<double>& row, const std::string& note = {}) {
        rows.push_back(row);
        notes.push_back(note);
    }
};

namespace {

using cvqkd::channel::ChannelParams;
using cvqkd::finitesize::KeyRateReport;
using cvqkd::finitesize::ProtocolParams;

ProtocolParams protocol_from(const cvqkd_opts& o) {
    ProtocolParams p;
    p.n_rounds = o.get("protocol.n_rounds", 1e11);
    p.mu = o.get("protocol.mu", 0.5);
    p.p_sig = o.get("protocol.p_sig", 0.8);
    p.p_test = 1.0 - p.p_sig;
    p.beta = o.get("protocol.beta", 0.0);
    p.s = static_cast<int>(o.get("protocol.s", 104));
    p.s_prime = static_cast<int>(o.get("protocol.s_prime", 51));
    p.kappa = o.get("protocol.kappa", 1.5);
    p.gamma = o.get("protocol.gamma", 0.2);
    p.witness.m = static_cast<int>(o.get("protocol.m", 1));
    p.witness.r = o.get("protocol.r", 0.4120);
    p.x_th = o.get("protocol.x_th", 0.4);
    if (o.has("protocol.epsilon")) p.epsilon = o.get("protocol.epsilon", 0.0);
    else p.epsilon = std::exp2(-o.get("protocol.epsilon_log2", 104.0));
    return p;
}

ChannelParams channel_from(const cvqkd_opts& o) {
    ChannelParams ch;
    const double xi = o.get("channel.xi", 0.0);
    if (o.has("channel.attenuation_db"))
        return ChannelParams::from_attenuation_db(o.get("channel.attenuation_db", 0.0), xi);
    ch.eta = o.get("channel.eta", 1.0);
    ch.xi = xi;
    ch.validate();
    return ch;
}

cvqkd::opt::OptimizationConfig optimize_config_from(const cvqkd_opts& o) {
    cvqkd::opt::OptimizationConfig cfg;
    cfg.mu = {o.get("optimize.mu_lo", cfg.mu.lo), o.get("optimize.mu_hi", cfg.mu.hi)};
    cfg.p_sig = {o.get("optimize.p_sig_lo", cfg.p_sig.lo), o.get("optimize.p_sig_hi", cfg.p_sig.hi)};
    cfg.x_th = {o.get("optimize.x_th_lo", cfg.x_th.lo), o.get("optimize.x_th_hi", cfg.x_th.hi)};
    cfg.kappa = {o.get("optimize.kappa_lo", cfg.kappa.lo), o.get("optimize.kappa_hi", cfg.kappa.hi)};
    cfg.gamma = {o.get("optimize.gamma_lo", cfg.gamma.lo), o.get("optimize.gamma_hi", cfg.gamma.hi)};
    cfg.restarts = static_cast<int>(o.get("optimize.restarts", cfg.restarts));
    cfg.inner_restarts = static_cast<int>(o.get("optimize.inner_restarts", cfg.inner_restarts));
    cfg.f_tol = o.get("optimize.f_tol", cfg.f_tol);
    cfg.x_tol = o.get("optimize.x_tol", cfg.x_tol);
    cfg.max_evals = static_cast<int>(o.get("optimize.max_evals", cfg.max_evals));
    cfg.inner_max_evals = static_cast<int>(o.get("optimize.inner_max_evals", cfg.inner_max_evals));
    cfg.seed = static_cast<std::uint64_t>(o.get("optimize.seed", 1.0));
    cfg.n_max = static_cast<int>(o.get("engine.n_max", 0.0));
    cfg.asymptotic = o.get("engine.asymptotic", 0.0) != 0.0;
    cfg.workers = static_cast<int>(o.get("engine.workers", 0.0));
    return cfg;
}

void require_keys(const cvqkd_opts& o, const std::vector<std::string>& keys) {
    std::string missing;
    for (const auto& k : keys) {
        if (k == "channel.eta") {
            if (!o.has("channel.eta") && !o.has("channel.attenuation_db")) {
                if (!missing.empty()) missing += ", ";
                missing += "channel.eta (or channel.attenuation_db)";
            }
            continue;
        }
        if (!o.has(k)) {
            if (!missing.empty()) missing += ", ";
            missing += k;
        }
    }
    if (!missing.empty()) throw std::invalid_argument("missing required key(s): " + missing);
}

const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {
        "atten_db", "eta", "xi", "n_rounds", "mu", "p_sig", "p_test", "beta", "x_th", "kappa",
        "gamma", "s", "s_prime", "epsilon", "b_value", "b_branch", "c_min", "c_max", "delta1",
        "delta2", "f_hat", "n_suc", "e_bit", "u_value", "h_ec", "n_fin", "gain", "key_rate",
        "security_level"};
    return cols;
}

std::vector<double> report_row(const ChannelParams& ch, const ProtocolParams& p,
                               const KeyRateReport& r) {
    return {ch.attenuation_db(), ch.eta, ch.xi, p.n_rounds, p.mu, p.p_sig, p.p_test, p.beta,
            p.x_th, p.kappa, p.gamma, static_cast<double>(p.s), static_cast<double>(p.s_prime),
            p.epsilon, r.b_value, static_cast<double>(r.b_branch), r.c_min, r.c_max, r.delta1,
            r.delta2, r.f_hat, r.n_suc, r.e_bit, r.u_of_f, r.h_ec, r.n_fin, r.gain,
            std::max(r.gain, 0.0), r.security_level};
}

int require(const void* p, const char* what) {
    if (p) return CVQKD_OK;
    return fail(CVQKD_ERR_ARGUMENT, std::string("null ") + what);
}

}  // namespace

extern "C" {

const char* cvqkd_version(void) { return "1.0.0"; }

const char* cvqkd_status_name(int status) {
    switch (status) {
        case CVQKD_OK: return "ok";
        case CVQKD_ERR_ARGUMENT: return "argument";
        case CVQKD_ERR_KEY: return "unknown-key";
        case CVQKD_ERR_DOMAIN: return "domain";
        case CVQKD_ERR_NUMERIC: return "numeric";
        default: return "internal";
    }
}

const char* cvqkd_last_error(void) { return g_last_error.c_str(); }

cvqkd_opts* cvqkd_opts_new(void) { return new (std::nothrow) cvqkd_opts(); }

void cvqkd_opts_free(cvqkd_opts* opts) { delete opts; }

int cvqkd_opts_set(cvqkd_opts* opts, const char* key, double value) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(key, "key"); rc != CVQKD_OK) return rc;
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), std::string(key)) == keys.end())
        return fail(CVQKD_ERR_KEY, std::string("unknown configuration key: ") + key);
    opts->values[key] = value;
    g_last_error.clear();
    return CVQKD_OK;
}

int cvqkd_opts_get(const cvqkd_opts* opts, const char* key, double* value) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(key, "key"); rc != CVQKD_OK) return rc;
    if (int rc = require(value, "value"); rc != CVQKD_OK) return rc;
    const auto it = opts->values.find(key);
    if (it == opts->values.end()) return fail(CVQKD_ERR_KEY, std::string("key not set: ") + key);
    *value = it->second;
    return CVQKD_OK;
}

size_t cvqkd_known_key_count(void) { return known_keys().size(); }

const char* cvqkd_known_key_name(size_t index) {
    const auto& keys = known_keys();
    return index < keys.size() ? keys[index].c_str() : nullptr;
}

int cvqkd_run_rate(const cvqkd_opts* opts, cvqkd_table** out) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(out, "out"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        require_keys(*opts, {"protocol.mu", "protocol.p_sig", "protocol.x_th", "protocol.kappa",
                             "protocol.gamma", "channel.eta", "channel.xi"});
        const ProtocolParams p = protocol_from(*opts);
        const ChannelParams ch = channel_from(*opts);
        cvqkd::opt::RateOptions ro;
        ro.n_max = static_cast<int>(opts->get("engine.n_max", 0.0));
        ro.asymptotic = opts->get("engine.asymptotic", 0.0) != 0.0;
        const KeyRateReport r = cvqkd::opt::evaluate_rate(ch, p, ro);
        ProtocolParams shown = p;
        shown.beta = std::sqrt(ch.eta * p.mu);
        auto* table = new cvqkd_table();
        table->columns = report_columns();
        table->add_row(report_row(ch, shown, r));
        *out = table;
        return static_cast<int>(CVQKD_OK);
    });
}

int cvqkd_run_optimize(const cvqkd_opts* opts, cvqkd_table** out) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(out, "out"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        const ProtocolParams p = protocol_from(*opts);
        const ChannelParams ch = channel_from(*opts);
        const cvqkd::opt::OptimizationConfig cfg = optimize_config_from(*opts);
        const cvqkd::opt::OptimizeResult res = cvqkd::opt::optimize_point(ch, p, cfg);
        auto* table = new cvqkd_table();
        table->columns = report_columns();
        table->columns.push_back("converged");
        table->columns.push_back("evals");
        std::vector<double> row = report_row(ch, res.params, res.report);
        row.push_back(res.converged ? 1.0 : 0.0);
        row.push_back(static_cast<double>(res.evals));
        table->add_row(row);
        *out = table;
        return static_cast<int>(CVQKD_OK);
    });
}

int cvqkd_run_sweep(const cvqkd_opts* opts, cvqkd_table** out) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(out, "out"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        const ProtocolParams p = protocol_from(*opts);
        const cvqkd::opt::OptimizationConfig cfg = optimize_config_from(*opts);
        const double db_start = opts->get("sweep.db_start", 0.0);
        const double db_stop = opts->get("sweep.db_stop", 10.0);
        const double db_step = opts->get("sweep.db_step", 1.0);
        if (!(db_step > 0.0)) throw std::invalid_argument("sweep.db_step must be positive");
        std::vector<double> grid;
        for (double db = db_start; db <= db_stop + 1e-12; db += db_step) grid.push_back(db);
        const double xi = opts->get("channel.xi", 0.0);
        const std::vector<cvqkd::opt::SweepRow> rows =
            cvqkd::opt::sweep(grid, xi, p.n_rounds, p, cfg);
        auto* table = new cvqkd_table();
        table->columns = {"atten_db", "eta", "xi", "n_rounds", "mu", "p_sig", "x_th", "kappa",
                          "gamma", "b_value", "u_value", "n_suc", "h_ec", "key_rate"};
        for (const auto& r : rows)
            table->add_row({r.atten_db, r.eta, r.xi, r.n_rounds, r.mu, r.p_sig, r.x_th, r.kappa,
                            r.gamma, r.b_value, r.u_value, r.n_suc, r.h_ec, r.key_rate},
                           r.error);
        *out = table;
        return static_cast<int>(CVQKD_OK);
    });
}

int cvqkd_run_simulate(const cvqkd_opts* opts, cvqkd_table** out) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(out, "out"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        require_keys(*opts, {"protocol.mu", "protocol.p_sig", "protocol.x_th", "protocol.kappa",
                             "protocol.gamma", "protocol.n_rounds", "channel.eta", "channel.xi"});
        ProtocolParams p = protocol_from(*opts);
        const ChannelParams ch = channel_from(*opts);
        if (p.beta == 0.0) p.beta = std::sqrt(ch.eta * p.mu);
        cvqkd::sim::SimOptions so;
        so.workers = static_cast<int>(opts->get("engine.workers", 0.0));
        if (opts->get("sim.two_stage", 0.0) != 0.0) so.noise = cvqkd::sim::NoiseSampling::two_stage;
        const auto seed = static_cast<std::uint64_t>(opts->get("sim.seed", 1.0));
        const cvqkd::sim::SimTally tally = cvqkd::sim::run_protocol(ch, p, seed, so);
        const KeyRateReport r = cvqkd::sim::simulated_key(tally, p);
        auto* table = new cvqkd_table();
        table->columns = {"seed",       "n_rounds",  "n_suc",  "n_fail", "n_test",
                          "bit_errors", "f_hat",     "b_value", "delta1", "delta2",
                          "u_value",    "e_bit",     "h_ec",    "n_fin",  "gain",
                          "key_rate",   "security_level"};
        table->add_row({static_cast<double>(tally.seed), static_cast<double>(tally.n_rounds),
                        static_cast<double>(tally.n_suc), static_cast<double>(tally.n_fail),
                        static_cast<double>(tally.n_test), static_cast<double>(tally.bit_errors),
                        tally.f_hat, r.b_value, r.delta1, r.delta2, r.u_of_f, r.e_bit, r.h_ec,
                        r.n_fin, r.gain, std::max(r.gain, 0.0), r.security_level});
        *out = table;
        return static_cast<int>(CVQKD_OK);
    });
}

int cvqkd_run_verify(const cvqkd_opts* opts, cvqkd_table** out) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(out, "out"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        cvqkd::check::SuiteConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(opts->get("verify.seed", 7.0));
        cfg.n_max = static_cast<int>(opts->get("verify.n_max", 40.0));
        cfg.operator_samples = static_cast<int>(opts->get("verify.operator_samples", 50.0));
        cfg.state_samples = static_cast<int>(opts->get("verify.state_samples", 40.0));
        cfg.sim_rounds = static_cast<std::uint64_t>(opts->get("verify.sim_rounds", 200000.0));
        cfg.b_scale = opts->get("verify.b_scale", 1.0);
        const std::vector<cvqkd::check::CheckResult> results = cvqkd::check::run_suite(cfg);
        auto* table = new cvqkd_table();
        table->columns = {"passed", "margin", "lhs", "rhs"};
        for (const auto& c : results) {
            std::string note = c.name;
            if (!c.detail.empty()) note += " (" + c.detail + ")";
            table->add_row({c.passed ? 1.0 : 0.0, c.margin, c.lhs, c.rhs}, note);
        }
        *out = table;
        return static_cast<int>(CVQKD_OK);
    });
}

int cvqkd_dump_operators(const cvqkd_opts* opts, const char* dir) {
    if (int rc = require(opts, "opts"); rc != CVQKD_OK) return rc;
    if (int rc = require(dir, "dir"); rc != CVQKD_OK) return rc;
    return run_guarded([&] {
        const ProtocolParams p = protocol_from(*opts);
        const ChannelParams ch = channel_from(*opts);
        const double beta = p.beta > 0.0 ? p.beta : std::sqrt(ch.eta * p.mu);
        int n_max = static_cast<int>(opts->get("engine.n_max", 0.0));
        if (n_max <= 0) n_max = cvqkd::povm::FockSpace::recommended_cutoff(beta);
        const cvqkd::povm::FockSpace space{n_max};
        const cvqkd::povm::SuccessPovm sp = cvqkd::povm::build_success_povm(space, p.x_th);
        std::filesystem::create_directories(dir);
        const auto write = [&](const char* name, const cvqkd::linalg::Matrix& m) {
            std::ofstream f(std::filesystem::path(dir) / name);
            f.precision(17);
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    if (j) f << ',';
                    f << m(i, j);
                }
                f << '\n';
            }
            if (!f) throw std::runtime_error(std::string("failed writing ") + name);
        };
        write("m_ev.csv", sp.m_ev.entries);
        write("m_od.csv", sp.m_od.entries);
        return static_cast<int>(CVQKD_OK);
    });
}

void cvqkd_table_free(cvqkd_table* table) { delete table; }

size_t cvqkd_table_rows(const cvqkd_table* table) { return table ? table->rows.size() : 0; }

size_t cvqkd_table_cols(const cvqkd_table* table) { return table ? table->columns.size() : 0; }

const char* cvqkd_table_col_name(const cvqkd_table* table, size_t col) {
    if (!table || col >= table->columns.size()) return nullptr;
    return table->columns[col].c_str();
}

double cvqkd_table_value(const cvqkd_table* table, size_t row, size_t col) {
    if (!table || row >= table->rows.size() || col >= table->rows[row].size()) return 0.0;
    return table->rows[row][col];
}

const char* cvqkd_table_row_note(const cvqkd_table* table, size_t row) {
    if (!table || row >= table->notes.size()) return "";
    return table->notes[row].c_str();
}

}  // extern "C"
