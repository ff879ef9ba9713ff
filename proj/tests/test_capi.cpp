#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvqkd.h"

#include "cvqkd/optimize.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace {

struct Opts {
    cvqkd_opts* p = cvqkd_opts_new();
    ~Opts() { cvqkd_opts_free(p); }
    void set(const char* key, double v) { REQUIRE(cvqkd_opts_set(p, key, v) == CVQKD_OK); }
};

struct Table {
    cvqkd_table* p = nullptr;
    ~Table() { cvqkd_table_free(p); }
    double at(size_t row, const std::string& name) const {
        for (size_t c = 0; c < cvqkd_table_cols(p); ++c)
            if (name == cvqkd_table_col_name(p, c)) return cvqkd_table_value(p, row, c);
        FAIL(("no column named " + name).c_str());
        return 0.0;
    }
};

void set_reference_point(Opts& o) {
    o.set("channel.eta", 1.0);
    o.set("channel.xi", 0.0);
    o.set("protocol.mu", 0.6);
    o.set("protocol.p_sig", 0.8);
    o.set("protocol.x_th", 0.5);
    o.set("protocol.kappa", 2.0);
    o.set("protocol.gamma", 0.3);
}

}  // namespace

TEST_CASE("version, status names, error text") {
    CHECK(std::string(cvqkd_version()) == "1.0.0");
    CHECK(std::string(cvqkd_status_name(CVQKD_OK)) == "ok");
    CHECK(std::string(cvqkd_status_name(CVQKD_ERR_KEY)) == "unknown-key");
    CHECK(cvqkd_last_error() != nullptr);
}

TEST_CASE("options: unknown keys rejected, get/set round trip, key registry") {
    Opts o;
    CHECK(cvqkd_opts_set(o.p, "protocol.bogus", 1.0) == CVQKD_ERR_KEY);
    CHECK(std::string(cvqkd_last_error()).find("protocol.bogus") != std::string::npos);
    CHECK(cvqkd_opts_set(nullptr, "protocol.mu", 1.0) == CVQKD_ERR_ARGUMENT);
    o.set("protocol.mu", 0.37);
    double v = 0.0;
    CHECK(cvqkd_opts_get(o.p, "protocol.mu", &v) == CVQKD_OK);
    CHECK(v == 0.37);
    CHECK(cvqkd_opts_get(o.p, "protocol.x_th", &v) == CVQKD_ERR_KEY);
    CHECK(cvqkd_known_key_count() > 30);
    bool found = false;
    for (size_t i = 0; i < cvqkd_known_key_count(); ++i)
        if (std::string(cvqkd_known_key_name(i)) == "channel.xi") found = true;
    CHECK(found);
}

TEST_CASE("rate run: schema validation and agreement with the core pipeline") {
    {
        Opts incomplete;
        incomplete.set("channel.eta", 1.0);
        incomplete.set("channel.xi", 0.0);
        Table t;
        CHECK(cvqkd_run_rate(incomplete.p, &t.p) == CVQKD_ERR_DOMAIN);
        CHECK(std::string(cvqkd_last_error()).find("protocol.mu") != std::string::npos);
    }
    Opts o;
    set_reference_point(o);
    Table t;
    REQUIRE(cvqkd_run_rate(o.p, &t.p) == CVQKD_OK);
    REQUIRE(cvqkd_table_rows(t.p) == 1);

    cvqkd::finitesize::ProtocolParams p;
    p.mu = 0.6;
    p.p_sig = 0.8;
    p.p_test = 0.2;
    p.x_th = 0.5;
    p.kappa = 2.0;
    p.gamma = 0.3;
    const cvqkd::finitesize::KeyRateReport rep =
        cvqkd::opt::evaluate_rate(cvqkd::channel::ChannelParams{1.0, 0.0}, p, {});
    CHECK(t.at(0, "b_value") == rep.b_value);
    CHECK(t.at(0, "u_value") == rep.u_of_f);
    CHECK(t.at(0, "gain") == rep.gain);
    CHECK(t.at(0, "security_level") == std::exp2(-50));
    CHECK(t.at(0, "beta") == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
}

TEST_CASE("domain errors surface with messages") {
    Opts o;
    set_reference_point(o);
    o.set("protocol.p_sig", 1.5);
    Table t;
    CHECK(cvqkd_run_rate(o.p, &t.p) == CVQKD_ERR_DOMAIN);
    CHECK(std::string(cvqkd_last_error()).find("p_sig") != std::string::npos);
}

TEST_CASE("simulate run: determinism through the C surface") {
    Opts o;
    set_reference_point(o);
    o.set("channel.eta", 0.5);
    o.set("channel.xi", 1e-2);
    o.set("protocol.n_rounds", 200000);
    o.set("sim.seed", 77);
    Table t1, t2;
    REQUIRE(cvqkd_run_simulate(o.p, &t1.p) == CVQKD_OK);
    REQUIRE(cvqkd_run_simulate(o.p, &t2.p) == CVQKD_OK);
    CHECK(t1.at(0, "f_hat") == t2.at(0, "f_hat"));
    CHECK(t1.at(0, "n_suc") == t2.at(0, "n_suc"));
    CHECK(t1.at(0, "n_suc") + t1.at(0, "n_fail") + t1.at(0, "n_test") == 200000);
    CHECK(t1.at(0, "gain") == t2.at(0, "gain"));
}

TEST_CASE("sweep run: rows, per-row notes, grid handling") {
    Opts o;
    o.set("channel.xi", 0.0);
    o.set("sweep.db_start", 0.0);
    o.set("sweep.db_stop", 2.0);
    o.set("sweep.db_step", 1.0);
    o.set("engine.asymptotic", 1.0);
    o.set("optimize.restarts", 1);
    o.set("optimize.max_evals", 120);
    o.set("engine.n_max", 40);
    o.set("optimize.seed", 9);
    Table t;
    REQUIRE(cvqkd_run_sweep(o.p, &t.p) == CVQKD_OK);
    REQUIRE(cvqkd_table_rows(t.p) == 3);
    CHECK(std::string(cvqkd_table_row_note(t.p, 0)).empty());
    CHECK(t.at(0, "key_rate") > 0.0);
    CHECK(t.at(2, "atten_db") == 2.0);
    // degenerate grid: a single point
    Opts single;
    single.set("channel.xi", 0.0);
    single.set("sweep.db_start", 1.0);
    single.set("sweep.db_stop", 1.0);
    single.set("sweep.db_step", 1.0);
    single.set("engine.asymptotic", 1.0);
    single.set("optimize.restarts", 1);
    single.set("optimize.max_evals", 60);
    single.set("engine.n_max", 30);
    Table ts;
    REQUIRE(cvqkd_run_sweep(single.p, &ts.p) == CVQKD_OK);
    CHECK(cvqkd_table_rows(ts.p) == 1);
}

TEST_CASE("verify run: all checks pass, fault injection breaks the operator check") {
    Opts o;
    o.set("verify.operator_samples", 8);
    o.set("verify.state_samples", 8);
    o.set("verify.sim_rounds", 50000);
    Table t;
    REQUIRE(cvqkd_run_verify(o.p, &t.p) == CVQKD_OK);
    CHECK(cvqkd_table_rows(t.p) >= 8);
    for (size_t r = 0; r < cvqkd_table_rows(t.p); ++r) {
        INFO(cvqkd_table_row_note(t.p, r));
        CHECK(cvqkd_table_value(t.p, r, 0) == 1.0);
        CHECK(std::string(cvqkd_table_row_note(t.p, r)).size() > 3);
    }

    Opts faulty;
    faulty.set("verify.operator_samples", 8);
    faulty.set("verify.state_samples", 4);
    faulty.set("verify.sim_rounds", 20000);
    faulty.set("verify.b_scale", 0.9);
    Table tf;
    REQUIRE(cvqkd_run_verify(faulty.p, &tf.p) == CVQKD_OK);
    bool operator_check_failed = false;
    for (size_t r = 0; r < cvqkd_table_rows(tf.p); ++r)
        if (std::string(cvqkd_table_row_note(tf.p, r)).find("operator-inequality") != std::string::npos)
            operator_check_failed = cvqkd_table_value(tf.p, r, 0) == 0.0;
    CHECK(operator_check_failed);
}

TEST_CASE("operator dump writes CSV matrices") {
    Opts o;
    set_reference_point(o);
    o.set("engine.n_max", 12);
    const std::string dir = "capi_dump_test";
    std::filesystem::remove_all(dir);
    REQUIRE(cvqkd_dump_operators(o.p, dir.c_str()) == CVQKD_OK);
    CHECK(std::filesystem::file_size(std::filesystem::path(dir) / "m_ev.csv") > 100);
    CHECK(std::filesystem::file_size(std::filesystem::path(dir) / "m_od.csv") > 100);
    std::filesystem::remove_all(dir);
}
