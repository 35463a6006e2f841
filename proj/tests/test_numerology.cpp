#include "doctest.h"
#include "nrv2x/numerology.hpp"

using namespace nrv2x;

TEST_CASE("numerology table rows") {
    for (int mu = 0; mu <= 3; ++mu) {
        Numerology n{mu, CyclicPrefix::Normal};
        CHECK(n.scs_khz() == 15 << mu);
        CHECK(n.slots_per_subframe() == (1 << mu));
        CHECK(n.slot_duration_ms() == doctest::Approx(1.0 / (1 << mu)));
        CHECK(n.symbols_per_slot() == 14);
        CHECK(n.ms_to_slots(10) == 10 * (1 << mu));
    }
    Numerology ext{2, CyclicPrefix::Extended};
    CHECK(ext.symbols_per_slot() == 12);
}

TEST_CASE("numerology validation") {
    CHECK_NOTHROW(make_numerology(0, CyclicPrefix::Normal, 6.0));
    CHECK_NOTHROW(make_numerology(1, CyclicPrefix::Normal, 6.0));
    CHECK_NOTHROW(make_numerology(2, CyclicPrefix::Extended, 6.0));
    CHECK_NOTHROW(make_numerology(2, CyclicPrefix::Normal, 30.0));
    CHECK_NOTHROW(make_numerology(3, CyclicPrefix::Normal, 30.0));

    CHECK_THROWS_AS(make_numerology(4, CyclicPrefix::Normal, 6.0), std::invalid_argument);
    CHECK_THROWS_AS(make_numerology(1, CyclicPrefix::Extended, 6.0), std::invalid_argument);
    // 120 kHz is FR2-only; 15/30 kHz are FR1-only.
    CHECK_THROWS_AS(make_numerology(3, CyclicPrefix::Normal, 6.0), std::invalid_argument);
    CHECK_THROWS_AS(make_numerology(0, CyclicPrefix::Normal, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(make_numerology(0, CyclicPrefix::Normal, 10.0), std::invalid_argument);
}

TEST_CASE("processing times per SCS") {
    CHECK(t_proc1_slots(0) == 3);
    CHECK(t_proc1_slots(1) == 5);
    CHECK(t_proc1_slots(2) == 9);
    CHECK(t_proc1_slots(3) == 17);
    CHECK(t_proc0_slots(0) == 1);
    CHECK(t_proc0_slots(1) == 1);
    CHECK(t_proc0_slots(2) == 2);
    CHECK(t_proc0_slots(3) == 4);
}
