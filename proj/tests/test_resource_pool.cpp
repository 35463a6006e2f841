#include <cmath>
#include <set>

#include "doctest.h"
#include "nrv2x/resource_pool.hpp"

using namespace nrv2x;

namespace {

ResourcePool base_pool() {
    ResourcePool p;
    p.numerology = Numerology{0, CyclicPrefix::Normal};
    p.num_subchannels = 3;
    p.subchannel_prbs = 20;
    p.slot_bitmap.assign(10, 1);
    p.pscch = {2, 10};
    p.rri_list_ms = {100};
    p.rsrp_threshold_dbm.assign(8, std::vector<double>(8, -110.0));
    p.x_percent_by_priority.assign(8, 20);
    return p;
}

}  // namespace

TEST_CASE("pool validation rejects out-of-set fields") {
    ResourcePool p = base_pool();
    p.subchannel_prbs = 13;
    CHECK_THROWS_WITH_AS(p.validate(),
                         doctest::Contains("subchannel_prbs"), std::invalid_argument);

    p = base_pool();
    p.rri_list_ms = {150};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = base_pool();
    p.psfch.period = 3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = base_pool();
    p.psfch.period = 4;
    p.psfch.cs_pairs = 2;
    p.psfch.prb_bitmap.assign(60, 1);
    CHECK_NOTHROW(p.validate());
    p.psfch.prb_bitmap[0] = 0;  // 59 PRBs is not a multiple of N*L = 12
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("pool slot index walks the bitmap") {
    ResourcePool p = base_pool();
    p.slot_bitmap = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    CHECK(pool_slot_index(0, p) == Slot{0});
    CHECK(pool_slot_index(1, p) == std::nullopt);
    CHECK(pool_slot_index(2, p) == Slot{1});
    CHECK(pool_slot_index(8, p) == Slot{4});
    CHECK(pool_slot_index(10, p) == Slot{5});
}

TEST_CASE("pool slot bitmap repeats with the 10240 ms period") {
    ResourcePool p = base_pool();
    p.slot_bitmap = {1, 1, 0, 1, 0, 0, 1, 1, 1, 0};
    const Slot period = p.period_slots();
    CHECK(period == 10240);
    for (Slot k = 0; k < 40; ++k) {
        CHECK(pool_slot_index(k, p).has_value() ==
              pool_slot_index(period + k, p).has_value());
    }
    // Ordinals advance by the per-period count across the boundary.
    const Slot per_period = *pool_slot_index(period, p);
    CHECK(per_period == 10240 / 10 * 6);
}

TEST_CASE("absolute slot of pool index round-trips") {
    ResourcePool p = base_pool();
    p.slot_bitmap = {1, 0, 1, 1, 0, 1, 0, 0, 1, 1};
    for (Slot ord = 0; ord < 500; ++ord) {
        const Slot abs = absolute_slot_of_pool_index(ord, p);
        REQUIRE(pool_slot_index(abs, p) == ord);
    }
}

TEST_CASE("psfch slot mapping honors the K gap") {
    ResourcePool p = base_pool();
    p.psfch.period = 4;
    p.psfch.bearer_offset = 2;  // bearers at pool slots 2, 6, 10, ...
    p.psfch.min_gap = 3;
    p.psfch.cs_pairs = 2;
    CHECK(psfch_slot_for(0, p) == 6);

    p.psfch.min_gap = 2;
    CHECK(psfch_slot_for(0, p) == 2);
    // Triggered on a bearer slot: strictly >= n+K, then the next bearer.
    CHECK(psfch_slot_for(2, p) == 6);

    for (Slot n = 0; n < 200; ++n) {
        const Slot m = psfch_slot_for(n, p);
        CHECK(m - n >= p.psfch.min_gap);
        CHECK(is_psfch_bearer(m, p));
    }
}

TEST_CASE("psfch index mapping reproduces the worked layout") {
    // N = 4, L = 3, M_sub = 20 -> M = 60 usable PRBs, M_set = 5, Q = 2.
    ResourcePool p = base_pool();
    p.psfch.period = 4;
    p.psfch.bearer_offset = 3;
    p.psfch.min_gap = 3;
    p.psfch.cs_pairs = 2;
    p.validate();
    REQUIRE(p.psfch_m() == 60);
    REQUIRE(p.psfch_m_set() == 5);

    // Transmission over sub-channels {0,1} (L_PSSCH = 2) at window slot w.
    SlotResource pssch{0, 0, 2};
    const int w = psfch_slot_in_window(pssch.pool_slot, p);
    REQUIRE(psfch_capacity(pssch, p) == 20);  // F = 2 * 5 * 2

    // With T_ID + R_ID = 17: PSFCH index 17 of 20 -> eighth PRB of the
    // transmission's 10-PRB pool, second cyclic-shift pair.
    const PsfchResource r = psfch_resource(17, 0, pssch, p, false);
    const auto usable = p.psfch_usable_prbs();
    const int set_second_subch = 1 * 4 + w;
    CHECK(r.prb == usable[static_cast<size_t>(set_second_subch * 5 + 2)]);
    CHECK(r.cs_pair == 1);
    CHECK(r.shift == 0);
    CHECK(psfch_resource(17, 0, pssch, p, true).shift == 1);

    // T_ID = 0, R_ID = 0 -> first PRB of the pool, first pair.
    const PsfchResource r0 = psfch_resource(0, 0, pssch, p, false);
    const int set_first_subch = 0 * 4 + w;
    CHECK(r0.prb == usable[static_cast<size_t>(set_first_subch * 5 + 0)]);
    CHECK(r0.cs_pair == 0);

    // T_ID = 5, R_ID = 2 -> i = 7 -> eighth PRB, first pair.
    const PsfchResource r7 = psfch_resource(5, 2, pssch, p, false);
    CHECK(r7.prb == usable[static_cast<size_t>(set_second_subch * 5 + 2)]);
    CHECK(r7.cs_pair == 0);
}

TEST_CASE("psfch mapping is injective over the group and partitions the PRBs") {
    for (int n : {1, 2, 4}) {
        for (int l : {1, 2, 3, 4}) {
            for (int q : {1, 2, 3, 6}) {
                ResourcePool p = base_pool();
                p.num_subchannels = l;
                p.subchannel_prbs = 20;
                p.psfch.period = n;
                p.psfch.min_gap = 2;
                p.psfch.cs_pairs = q;
                // Use exactly M = N*L*2 PRBs so M_set = 2.
                p.psfch.prb_bitmap.assign(static_cast<size_t>(p.total_prbs()), 0);
                for (int i = 0; i < 2 * n * l; ++i) p.psfch.prb_bitmap[static_cast<size_t>(i)] = 1;
                p.validate();

                // Injectivity for one transmission: distinct (prb, pair) per R_ID.
                SlotResource pssch{0, 0, 1};
                const int f = psfch_capacity(pssch, p);
                std::set<std::pair<int, int>> seen;
                for (int rid = 0; rid < f; ++rid) {
                    const PsfchResource r =
                        psfch_resource(7, static_cast<std::uint32_t>(rid), pssch, p, false);
                    CHECK(seen.insert({r.prb, r.cs_pair}).second);
                }

                // Partition: over one bearer window, the PRB sets of all
                // (slot-in-window, sub-channel) pairs cover all M PRBs once.
                std::multiset<int> covered;
                const Slot bearer = psfch_slot_for(0, p);
                const Slot w_start = bearer - p.psfch.min_gap - n + 1;
                for (Slot s = w_start; s < w_start + n; ++s) {
                    for (int sc = 0; sc < l; ++sc) {
                        SlotResource one{s, sc, 1};
                        REQUIRE(psfch_slot_for(s, p) == bearer);
                        for (int rid = 0; rid < p.psfch_m_set() * q; ++rid) {
                            const PsfchResource r =
                                psfch_resource(0, static_cast<std::uint32_t>(rid), one, p, false);
                            if (r.cs_pair == 0) covered.insert(r.prb);
                        }
                    }
                }
                const auto usable = p.psfch_usable_prbs();
                CHECK(covered.size() == usable.size());
                std::set<int> unique_covered(covered.begin(), covered.end());
                CHECK(unique_covered.size() == usable.size());
            }
        }
    }
}

TEST_CASE("zone ids tile the plane") {
    CHECK(zone_id({0.1, 0.1}, 5) == 0);
    CHECK(zone_id({5.1, 0.1}, 5) == 1);
    CHECK(zone_id({0.1, 5.1}, 5) == 64);
    // 64-zone wraparound per axis.
    CHECK(zone_id({64.0 * 5 + 0.1, 0.1}, 5) == 0);
    CHECK(zone_id({-0.1, 0.1}, 5) == 63);
    for (double x : {0.0, 3.3, 100.0, -250.0})
        for (double y : {0.0, 7.7, -100.0}) {
            const int id = zone_id({x, y}, 10);
            CHECK(id >= 0);
            CHECK(id < 4096);
        }
}

TEST_CASE("zone distance finds the nearest center bearing the id") {
    // RX inside the zone: distance at most half the diagonal.
    const Vec2 rx{12.0, 3.0};
    const int id = zone_id(rx, 5);
    CHECK(zone_distance(rx, id, 5) <= 5.0 * std::sqrt(2.0) / 2.0 + 1e-9);

    // RX on a zone center: distance zero.
    const Vec2 center{25.0, 25.0};  // center of zone (0,0)-based index (0,0) at side 50
    CHECK(zone_distance(center, zone_id(center, 50), 50) == doctest::Approx(0.0));

    // Brute force over candidate centers, including the 64-zone repetitions.
    const int side = 5;
    for (const Vec2& pos : {Vec2{100.0, 40.0}, Vec2{-37.0, 400.0}, Vec2{1000.0, -3.0}}) {
        for (int id2 : {0, 65, 4095, 64 * 32 + 17}) {
            const int ix = id2 % 64;
            const int iy = id2 / 64;
            double best = 1e18;
            for (int a = -20; a <= 20; ++a)
                for (int b = -20; b <= 20; ++b) {
                    const double cx = (ix + 64.0 * a + 0.5) * side;
                    const double cy = (iy + 64.0 * b + 0.5) * side;
                    best = std::min(best, std::hypot(pos.x - cx, pos.y - cy));
                }
            CHECK(zone_distance(pos, id2, side) == doctest::Approx(best).epsilon(1e-9));
        }
    }
}
