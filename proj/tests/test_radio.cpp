#include <cmath>

#include "doctest.h"
#include "nrv2x/radio.hpp"

using namespace nrv2x;

TEST_CASE("rx power is tx power minus total loss") {
    CHECK(rx_power_dbm(23.0, 87.963) == doctest::Approx(-64.963));
    CHECK(rx_power_dbm(23.0, 0.0) == doctest::Approx(23.0));
    // Same PSD over twice the PRBs carries 3 dB more power.
    const double one = 10.0;
    const double two = one + 10.0 * std::log10(2.0);
    CHECK(two - one == doctest::Approx(3.0103).epsilon(1e-4));
}

TEST_CASE("sinr arithmetic") {
    NoiseModel noise;
    const int scs = 15;
    const PrbSpan span{0, 10};
    const double n_dbm = noise.noise_dbm(span.count, scs);
    CHECK(n_dbm == doctest::Approx(-174.0 + 10.0 * std::log10(10 * 12 * 15e3) + 9.0)
                       .epsilon(1e-12));

    // Signal at the noise floor, no interference: 0 dB.
    CHECK(sinr_db({span, n_dbm}, {}, noise, scs) == doctest::Approx(0.0).epsilon(1e-9));

    // One equal-power full-overlap interferer far above noise: about 0 dB.
    CHECK(sinr_db({span, 50.0}, {{span, 50.0}}, noise, scs) ==
          doctest::Approx(0.0).epsilon(1e-3));

    // Half-overlap interferer at equal PSD: hand-computed oracle.
    const PrbSpan half{5, 10};
    const double s_mw = dbm_to_mw(-60.0);
    const double i_mw = dbm_to_mw(-60.0) * 5.0 / 10.0;
    const double exp_sinr = 10.0 * std::log10(s_mw / (i_mw + dbm_to_mw(n_dbm)));
    CHECK(sinr_db({span, -60.0}, {{half, -60.0}}, noise, scs) ==
          doctest::Approx(exp_sinr).epsilon(1e-12));
}

TEST_CASE("rssi equals the linear sum of overlapping powers plus noise") {
    NoiseModel noise;
    const int scs = 15;
    const PrbSpan sub{10, 10};
    const std::vector<RxContribution> contr = {
        {{0, 20}, -70.0},   // half overlaps
        {{10, 10}, -80.0},  // fully inside
        {{25, 10}, -60.0},  // disjoint
    };
    const double expected_mw = dbm_to_mw(-70.0) * 0.5 + dbm_to_mw(-80.0) +
                               dbm_to_mw(noise.noise_dbm(10, scs));
    CHECK(rssi_dbm(contr, sub, noise, scs) ==
          doctest::Approx(mw_to_dbm(expected_mw)).epsilon(1e-12));
}

TEST_CASE("threshold decode") {
    LinkAbstraction la = default_link_abstraction();
    DecodeModel dm = make_decode_model(la);
    // Boundary convention: success at exactly the threshold.
    CHECK(decode(dm, DecodeKind::Tb, dm.tb_threshold_db[0], 0));
    CHECK_FALSE(decode(dm, DecodeKind::Tb, -1e18, 0));
    CHECK(decode(dm, DecodeKind::Sci, dm.sci_threshold_db, 5));
    // SCI threshold sits 3 dB below the lowest TB threshold.
    CHECK(dm.sci_threshold_db ==
          doctest::Approx(dm.tb_threshold_db[0] - 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(decode(dm, DecodeKind::Tb, 10.0, 99), std::out_of_range);

    // Monotonicity sweep: success at s implies success at s + 1 dB.
    for (int mcs = 0; mcs < static_cast<int>(la.spectral_efficiency.size()); ++mcs) {
        bool prev = false;
        for (double s = -20.0; s <= 40.0; s += 1.0) {
            const bool ok = decode(dm, DecodeKind::Tb, s, mcs);
            if (prev) CHECK(ok);
            prev = ok;
        }
    }
}

TEST_CASE("soft decode needs an rng and follows the logistic curve") {
    LinkAbstraction la = default_link_abstraction();
    DecodeModel dm = make_decode_model(la);
    dm.soft = true;
    dm.soft_slope_db = 1.0;
    CHECK_THROWS_AS(decode(dm, DecodeKind::Tb, 10.0, 0, nullptr), std::invalid_argument);
    RngStream rng(1, "soft");
    int ok = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (decode(dm, DecodeKind::Tb, dm.tb_threshold_db[0], 0, &rng)) ++ok;
    CHECK(std::abs(static_cast<double>(ok) / n - 0.5) < 0.01);
}

TEST_CASE("tb fitting picks the lowest mcs that fits") {
    LinkAbstraction la = default_link_abstraction();
    // capacity(mcs0, 1 sub-channel of 10 PRBs) = floor(0.2344*12*(10*9-10*2)) - 64.
    const std::int64_t c0 = capacity_bits(la, 0, 1, 10, 10, 2);
    CHECK(c0 == static_cast<std::int64_t>(std::floor(0.2344 * 12.0 * 70.0)) - 64);

    const auto fit = fit_tb(la, c0, 4, 10, 10, 2);
    REQUIRE(fit.has_value());
    CHECK(fit->mcs == 0);
    CHECK(fit->l_pssch == 1);

    // One more bit forces either more sub-channels at mcs 0.
    const auto fit2 = fit_tb(la, c0 + 1, 4, 10, 10, 2);
    REQUIRE(fit2.has_value());
    CHECK(fit2->mcs == 0);
    CHECK(fit2->l_pssch == 2);

    // Oversized TB does not fit at all.
    CHECK_FALSE(fit_tb(la, 10000000, 4, 10, 10, 2).has_value());

    // min_mcs lower bound honored (congestion knob).
    const auto fit3 = fit_tb(la, 100, 4, 10, 10, 2, 3);
    REQUIRE(fit3.has_value());
    CHECK(fit3->mcs == 3);
}

TEST_CASE("half duplex filter") {
    // A UE transmitting PSSCH receives nothing that slot.
    SlotIntents tx_slot;
    tx_slot.pssch_tx = true;
    const AllowedActions a = half_duplex_filter(tx_slot, 2);
    CHECK_FALSE(a.can_receive_pssch);
    CHECK_FALSE(a.psfch_rx_allowed);

    // PSFCH TX priority 3 vs PSFCH RX priority 1: the RX side wins.
    SlotIntents conflict;
    conflict.psfch_tx = {{3, 1}};
    conflict.psfch_rx = {{1, 2}};
    const AllowedActions b = half_duplex_filter(conflict, 2);
    CHECK(b.psfch_rx_allowed);
    CHECK(b.psfch_tx_selected.empty());

    // Reversed priorities: the TX side wins.
    SlotIntents conflict2;
    conflict2.psfch_tx = {{1, 1}};
    conflict2.psfch_rx = {{3, 2}};
    const AllowedActions c = half_duplex_filter(conflict2, 2);
    CHECK_FALSE(c.psfch_rx_allowed);
    CHECK(c.psfch_tx_selected.size() == 1);

    // Three duties, cap two: the two highest-priority ones are sent.
    SlotIntents many;
    many.psfch_tx = {{5, 10}, {2, 11}, {4, 12}};
    const AllowedActions d = half_duplex_filter(many, 2);
    REQUIRE(d.psfch_tx_selected.size() == 2);
    CHECK(d.psfch_tx_selected[0] == 1);  // priority 2
    CHECK(d.psfch_tx_selected[1] == 2);  // priority 4
}
