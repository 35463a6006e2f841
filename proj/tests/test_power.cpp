#include <cmath>

#include "doctest.h"
#include "nrv2x/power.hpp"
#include "nrv2x/rng.hpp"

using namespace nrv2x;

TEST_CASE("sl pathloss from averaged feedback") {
    CHECK(sl_pathloss_db(23.0, -70.0) == doctest::Approx(93.0));
    CHECK(sl_pathloss_db(0.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("pssch power control") {
    PowerConfig cfg;
    cfg.p_max_dbm = 23.0;
    cfg.use_sl_pathloss = true;
    cfg.p0_sl_dbm = -90.0;
    cfg.alpha_sl = 1.0;

    // mu=0, 10 PRBs: P0 + 10log10(10) + PL = -90 + 10 + 80 = 0 dBm.
    CHECK(pssch_power_dbm(cfg, 0, 10, std::nullopt, 80.0) == doctest::Approx(0.0).epsilon(1e-12));
    // Huge pathloss hits the cap.
    CHECK(pssch_power_dbm(cfg, 0, 10, std::nullopt, 500.0) == doctest::Approx(23.0));
    // Both terms enabled: the minimum of the three wins.
    cfg.use_dl_pathloss = true;
    cfg.p0_dl_dbm = -90.0;
    cfg.alpha_dl = 1.0;
    // DL term = -90 + 10 + 85 = 5 dBm, SL term = -90 + 10 + 90 = 10 dBm.
    CHECK(pssch_power_dbm(cfg, 0, 10, 85.0, 90.0) == doctest::Approx(5.0).epsilon(1e-12));
    // Both disabled: P_MAX.
    PowerConfig off;
    CHECK(pssch_power_dbm(off, 1, 20, 80.0, 80.0) == doctest::Approx(off.p_max_dbm));
    CHECK_THROWS_AS(pssch_power_dbm(cfg, 0, 0, 85.0, 90.0), std::invalid_argument);
}

TEST_CASE("pscch/pssch split conserves linear power") {
    const auto [p2, pc] = split_pscch_pssch(10.0, 20, 10);
    CHECK(p2 == doctest::Approx(10.0 - 3.0103).epsilon(1e-5));
    CHECK(pc == doctest::Approx(10.0 - 3.0103).epsilon(1e-5));
    CHECK_THROWS_AS(split_pscch_pssch(10.0, 20, 0), std::invalid_argument);
    CHECK_THROWS_AS(split_pscch_pssch(10.0, 20, 20), std::invalid_argument);

    RngStream rng(4, "split");
    for (int i = 0; i < 200; ++i) {
        const int m = static_cast<int>(rng.uniform_int(2, 400));
        const int mc = static_cast<int>(rng.uniform_int(1, m - 1));
        const double p1 = rng.uniform(-30.0, 30.0);
        const auto [a, b] = split_pscch_pssch(p1, m, mc);
        const double recon = dbm_to_mw(a) + dbm_to_mw(b);
        CHECK(recon == doctest::Approx(dbm_to_mw(p1)).epsilon(1e-12));
    }
}

TEST_CASE("psfch power") {
    PowerConfig cfg;
    cfg.p_max_dbm = 23.0;
    cfg.p0_psfch_dbm = -100.0;
    cfg.alpha_psfch = 1.0;
    CHECK(psfch_power_dbm(cfg, 0, 90.0, false) == doctest::Approx(23.0));
    CHECK(psfch_power_dbm(cfg, 0, 90.0, true) == doctest::Approx(-10.0).epsilon(1e-12));
    // Equal split across two simultaneous PSFCHs.
    CHECK(psfch_share_dbm(0.0, 2) == doctest::Approx(-3.0103).epsilon(1e-5));
    CHECK_THROWS_AS(psfch_share_dbm(0.0, 0), std::invalid_argument);
}

TEST_CASE("sssb power") {
    PowerConfig cfg;
    cfg.p_max_dbm = 23.0;
    cfg.p0_sssb_dbm = -100.0;
    cfg.alpha_sssb = 1.0;
    CHECK(sssb_power_dbm(cfg, 0, 90.0, false) == doctest::Approx(23.0));
    const double mu0 = sssb_power_dbm(cfg, 0, 90.0, true);
    CHECK(mu0 == doctest::Approx(-10.0 + 10.0 * std::log10(11.0)).epsilon(1e-12));
    CHECK(mu0 == doctest::Approx(0.414).epsilon(1e-3));
    // mu=1 adds exactly 10 log10(2) to the bandwidth term.
    const double mu1 = sssb_power_dbm(cfg, 1, 90.0, true);
    CHECK(mu1 - mu0 == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("every emitted power stays at or below P_MAX") {
    PowerConfig cfg;
    cfg.p_max_dbm = 23.0;
    cfg.use_dl_pathloss = true;
    cfg.use_sl_pathloss = true;
    RngStream rng(9, "pmax");
    for (int i = 0; i < 500; ++i) {
        const int mu = static_cast<int>(rng.uniform_int(0, 3));
        const int m = static_cast<int>(rng.uniform_int(1, 400));
        const double pl1 = rng.uniform(0.0, 160.0);
        const double pl2 = rng.uniform(0.0, 160.0);
        CHECK(pssch_power_dbm(cfg, mu, m, pl1, pl2) <= cfg.p_max_dbm + 1e-12);
        CHECK(psfch_power_dbm(cfg, mu, pl1, true) <= cfg.p_max_dbm + 1e-12);
        CHECK(sssb_power_dbm(cfg, mu, pl1, true) <= cfg.p_max_dbm + 1e-12);
    }
}

TEST_CASE("pssch power is monotone in each enabled pathloss until the cap") {
    PowerConfig cfg;
    cfg.use_sl_pathloss = true;
    double prev = -1e9;
    for (double pl = 0.0; pl < 200.0; pl += 5.0) {
        const double p = pssch_power_dbm(cfg, 0, 10, std::nullopt, pl);
        CHECK(p >= prev - 1e-12);
        prev = p;
    }
    CHECK(prev == doctest::Approx(cfg.p_max_dbm));
}

TEST_CASE("rsrp averager is an exponential moving average") {
    RsrpAverager avg(0.5);
    CHECK(!avg.has_value());
    avg.update(-80.0);
    CHECK(avg.value() == doctest::Approx(-80.0));
    avg.update(-60.0);
    CHECK(avg.value() == doctest::Approx(-70.0));
}
