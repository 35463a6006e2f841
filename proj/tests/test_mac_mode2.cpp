#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "nrv2x/mac_mode2.hpp"
#include "nrv2x/numerology.hpp"

using namespace nrv2x;

namespace {

ResourcePool make_pool(int mu, int subchannels, std::vector<int> rri_list, int x_pct,
                       double threshold_dbm, int t0_ms = 100) {
    ResourcePool p;
    p.numerology = Numerology{mu, CyclicPrefix::Normal};
    p.num_subchannels = subchannels;
    p.subchannel_prbs = 10;
    p.slot_bitmap.assign(10, 1);
    p.pscch = {2, 10};
    p.rri_list_ms = std::move(rri_list);
    p.rsrp_threshold_dbm.assign(8, std::vector<double>(8, threshold_dbm));
    p.x_percent_by_priority.assign(8, x_pct);
    p.t0_ms = t0_ms;
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// Independent brute-force enumerator for step 1. Every exclusion predicate is
// evaluated directly per candidate with plain nested loops and exact integer
// arithmetic; no shared code with the implementation beyond the pool-slot
// bitmap walk.
namespace oracle {

struct Result {
    std::vector<Candidate> candidates;
    std::vector<uint8_t> available;
    std::vector<int> conflict_priority;
    int bump = 0;
    bool hd_skipped = false;
};

// ceil(t2_slots / rri_slots) in exact integers; equals ceil(T2_ms / RRI_ms).
std::int64_t q_of(std::int64_t rri_slots, std::int64_t t2_slots, Slot n, Slot anchor) {
    if (rri_slots < t2_slots && n - anchor <= rri_slots)
        return (t2_slots + rri_slots - 1) / rri_slots;
    return 1;
}

bool overlap(int a0, int ac, int b0, int bc) { return a0 < b0 + bc && b0 < a0 + ac; }

Result step1(const Step1Input& in, const std::vector<SensedEntry>& sensing,
             const ResourcePool& pool) {
    Result res;
    const int mu = pool.numerology.mu;
    const Slot n = in.window.trigger;
    const Slot t0 = pool.numerology.ms_to_slots(pool.t0_ms);
    const Slot sense_lo = n - t0;
    const Slot sense_hi = n - t_proc0_slots(mu);  // exclusive
    const std::int64_t t2 = in.window.t2_slots;

    for (Slot abs = n + in.window.t1_slots; abs <= n + in.window.t2_slots; ++abs) {
        if (!pool_slot_index(abs, pool)) continue;
        for (int s = 0; s + in.l_pssch <= pool.num_subchannels; ++s)
            res.candidates.push_back({abs, *pool_slot_index(abs, pool), s, in.l_pssch});
    }
    REQUIRE(!res.candidates.empty());

    const std::int64_t rtx =
        in.rri_tx_ms > 0 ? pool.numerology.ms_to_slots(in.rri_tx_ms) : 0;
    const std::int64_t jmax =
        in.rri_tx_ms > 0 ? 10 * static_cast<std::int64_t>(in.reselection_counter) - 1 : 0;

    auto excluded_by_own = [&](const Candidate& c) {
        for (Slot s : in.own_tx_slots) {
            if (s < sense_lo || s >= sense_hi) continue;
            for (int rri_ms : pool.rri_list_ms) {
                if (rri_ms <= 0) continue;
                const std::int64_t rs = pool.numerology.ms_to_slots(rri_ms);
                const std::int64_t qmax = q_of(rs, t2, n, s);
                for (std::int64_t q = 1; q <= qmax; ++q) {
                    if (c.abs_slot == s + q * rs) return true;
                    for (std::int64_t j = 1; j <= jmax; ++j)
                        if (c.abs_slot + j * rtx == s + q * rs) return true;
                }
            }
        }
        return false;
    };

    auto excluded_by_entry = [&](const Candidate& c, const SensedEntry& e, double bump) {
        if (e.slot < sense_lo || e.slot >= sense_hi) return false;
        const double th =
            pool.rsrp_threshold_dbm[static_cast<size_t>(in.own_priority - 1)]
                                   [static_cast<size_t>(e.priority - 1)] +
            bump;
        if (!(e.rsrp_dbm > th)) return false;
        const std::int64_t rrs = e.rri_ms > 0 ? pool.numerology.ms_to_slots(e.rri_ms) : 0;
        const std::int64_t qmax = e.rri_ms > 0 ? q_of(rrs, t2, n, e.slot) : 0;
        for (const SensedResource& r : e.resources) {
            if (!overlap(c.subchannel, c.num_subchannels, r.subchannel, r.num_subchannels))
                continue;
            if (c.abs_slot == r.slot) return true;
            for (std::int64_t q = 1; q <= qmax; ++q)
                if (c.abs_slot == r.slot + q * rrs) return true;
            for (std::int64_t j = 1; j <= jmax; ++j) {
                if (c.abs_slot + j * rtx == r.slot) return true;
                for (std::int64_t q = 1; q <= qmax; ++q)
                    if (c.abs_slot + j * rtx == r.slot + q * rrs) return true;
            }
        }
        return false;
    };

    const int x_pct = pool.x_percent_by_priority[static_cast<size_t>(in.own_priority - 1)];
    const auto total = static_cast<std::int64_t>(res.candidates.size());

    // Half-duplex feasibility first.
    std::int64_t hd_avail = 0;
    for (const Candidate& c : res.candidates)
        if (!excluded_by_own(c)) ++hd_avail;
    const bool use_hd = hd_avail * 100 >= total * x_pct;
    res.hd_skipped = !use_hd;

    for (int bump = 0;; bump += 3) {
        res.available.assign(res.candidates.size(), 1);
        res.conflict_priority.assign(res.candidates.size(), 0);
        std::int64_t avail = 0;
        for (size_t i = 0; i < res.candidates.size(); ++i) {
            const Candidate& c = res.candidates[i];
            bool excl = use_hd && excluded_by_own(c);
            for (const SensedEntry& e : sensing) {
                if (excluded_by_entry(c, e, bump)) {
                    excl = true;
                    if (res.conflict_priority[i] == 0 || e.priority < res.conflict_priority[i])
                        res.conflict_priority[i] = e.priority;
                }
            }
            if (!excl) {
                res.available[i] = 1;
                ++avail;
            } else {
                res.available[i] = 0;
            }
        }
        if (avail * 100 >= total * x_pct) {
            res.bump = bump;
            return res;
        }
    }
}

}  // namespace oracle

// Random instance generator for the oracle-equivalence check.
struct Instance {
    ResourcePool pool;
    Step1Input in;
    std::vector<SensedEntry> sensing;
};

Instance random_instance(RngStream& rng) {
    Instance inst;
    const int mu = static_cast<int>(rng.uniform_int(0, 1));
    const int l = static_cast<int>(rng.uniform_int(1, 4));
    std::vector<int> rris;
    for (int v : {20, 50, 100})
        if (rng.uniform() < 0.6) rris.push_back(v);
    if (rris.empty()) rris.push_back(100);
    const int x = std::array<int, 3>{20, 35, 50}[static_cast<size_t>(rng.uniform_int(0, 2))];
    inst.pool = make_pool(mu, l, rris, x, -100.0, 100);
    if (rng.uniform() < 0.3) {
        // Sparse pool bitmap.
        for (size_t i = 0; i < inst.pool.slot_bitmap.size(); ++i)
            inst.pool.slot_bitmap[i] = rng.uniform() < 0.7 ? 1 : 0;
        inst.pool.slot_bitmap[0] = 1;
    }

    const Slot n = 200 * (1 << mu) + rng.uniform_int(0, 50);
    inst.in.window.trigger = n;
    inst.in.window.t1_slots = t_proc1_slots(mu);
    inst.in.window.t2_slots =
        inst.in.window.t1_slots + static_cast<int>(rng.uniform_int(0, 37));
    inst.in.l_pssch = static_cast<int>(rng.uniform_int(1, l));
    inst.in.own_priority = static_cast<int>(rng.uniform_int(1, 8));
    if (rng.uniform() < 0.6) {
        inst.in.rri_tx_ms = rris[static_cast<size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(rris.size()) - 1))];
        inst.in.reselection_counter = static_cast<int>(rng.uniform_int(1, 15));
    }
    const Slot t0 = inst.pool.numerology.ms_to_slots(inst.pool.t0_ms);
    const int own_n = static_cast<int>(rng.uniform_int(0, 5));
    for (int i = 0; i < own_n; ++i)
        inst.in.own_tx_slots.push_back(n - rng.uniform_int(2, t0 - 1));

    const int ue_n = static_cast<int>(rng.uniform_int(0, 4));
    for (int u = 0; u < ue_n; ++u) {
        const int scis = static_cast<int>(rng.uniform_int(1, 2));
        for (int s = 0; s < scis; ++s) {
            SensedEntry e;
            e.slot = n - rng.uniform_int(2, t0 - 1);
            e.priority = static_cast<int>(rng.uniform_int(1, 8));
            e.rsrp_dbm = rng.uniform(-108.0, -85.0);
            const int rri_pick = static_cast<int>(rng.uniform_int(
                0, static_cast<std::int64_t>(rris.size())));
            e.rri_ms = rri_pick == static_cast<int>(rris.size())
                           ? 0
                           : rris[static_cast<size_t>(rri_pick)];
            const int nres = static_cast<int>(rng.uniform_int(1, 2));
            for (int r = 0; r < nres; ++r) {
                SensedResource sr;
                sr.slot = r == 0 ? e.slot : e.slot + rng.uniform_int(1, 31);
                sr.num_subchannels = static_cast<int>(rng.uniform_int(1, l));
                sr.subchannel =
                    static_cast<int>(rng.uniform_int(0, l - sr.num_subchannels));
                e.resources.push_back(sr);
            }
            inst.sensing.push_back(e);
        }
    }
    return inst;
}

// Regularized upper incomplete gamma Q(a, x), for the chi-square p-value.
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // Series for P(a,x).
        double sum = 1.0 / a;
        double term = sum;
        for (int k = 1; k < 500; ++k) {
            term *= x / (a + k);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Continued fraction for Q(a,x) (modified Lentz).
    double b = x + 1.0 - a;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_sf(double stat, int dof) { return gamma_q(dof / 2.0, stat / 2.0); }

}  // namespace

TEST_CASE("step1 with nothing to exclude keeps every candidate") {
    ResourcePool pool = make_pool(0, 2, {100}, 20, -100.0);
    Step1Input in;
    in.window = {200, 3, 20};
    in.l_pssch = 1;
    in.own_priority = 4;
    const Step1Result r = step1_exclude(in, {}, pool);
    CHECK(r.candidates.size() == 36);  // 18 slots x 2 sub-channels
    CHECK(r.available_count() == 36);
    CHECK(r.threshold_bump_db == 0);
    CHECK_FALSE(r.half_duplex_skipped);
}

TEST_CASE("step1 rejects an empty selection window") {
    ResourcePool pool = make_pool(0, 2, {100}, 20, -100.0);
    Step1Input in;
    in.window = {200, 10, 5};
    in.l_pssch = 1;
    in.own_priority = 4;
    CHECK_THROWS_AS(step1_exclude(in, {}, pool), EmptyWindowError);
}

TEST_CASE("a reservation above threshold excludes exactly the q=1 occurrence") {
    // RRI_RX = 100 ms >= T2 = 20 ms, so only one projected occurrence.
    ResourcePool pool = make_pool(0, 2, {100}, 20, -100.0);
    const Slot n = 200;
    Step1Input in;
    in.window = {n, 3, 20};
    in.l_pssch = 1;
    in.own_priority = 4;
    SensedEntry e;
    e.slot = n - 90;
    e.rri_ms = 100;
    e.priority = 2;
    e.rsrp_dbm = -99.0;  // 1 dB above the -100 threshold
    e.resources = {{n - 90, 0, 1}};
    const Step1Result r = step1_exclude(in, {e}, pool);
    int excluded = 0;
    for (size_t i = 0; i < r.candidates.size(); ++i) {
        if (r.available[i]) continue;
        ++excluded;
        CHECK(r.candidates[i].abs_slot == n + 10);  // s_k + RRI
        CHECK(r.candidates[i].subchannel == 0);     // frequency overlap only
        CHECK(r.conflict_priority[i] == 2);
    }
    CHECK(excluded == 1);

    // The same reservation below threshold excludes nothing.
    e.rsrp_dbm = -101.0;
    const Step1Result r2 = step1_exclude(in, {e}, pool);
    CHECK(r2.available_count() == static_cast<int>(r2.candidates.size()));
}

TEST_CASE("own transmission projects over every permitted RRI") {
    // RRI = 30 ms in the list, T2 = 100 ms, n - s_i <= 30: Q = 4.
    ResourcePool pool = make_pool(0, 2, {30}, 20, -100.0, 1100);
    const Slot n = 2000;
    Step1Input in;
    in.window = {n, 3, 100};
    in.l_pssch = 1;
    in.own_priority = 4;
    in.own_tx_slots = {n - 20};
    const Step1Result r = step1_exclude(in, {}, pool);
    std::set<Slot> excluded_slots;
    for (size_t i = 0; i < r.candidates.size(); ++i)
        if (!r.available[i]) excluded_slots.insert(r.candidates[i].abs_slot);
    CHECK(excluded_slots == std::set<Slot>{n + 10, n + 40, n + 70, n + 100});
    // Half-duplex exclusions hit all sub-channels and carry no priority.
    for (size_t i = 0; i < r.candidates.size(); ++i)
        if (!r.available[i]) CHECK(r.conflict_priority[i] == 0);
}

TEST_CASE("the X% floor skips half-duplex exclusions when they alone break it") {
    // Own transmissions mask every 20 ms stride of the whole window.
    ResourcePool pool = make_pool(0, 1, {20}, 50, -100.0, 100);
    const Slot n = 300;
    Step1Input in;
    in.window = {n, 3, 22};
    in.l_pssch = 1;
    in.own_priority = 4;
    for (Slot s = n - 40; s < n - 1; ++s) in.own_tx_slots.push_back(s);
    const Step1Result r = step1_exclude(in, {}, pool);
    CHECK(r.half_duplex_skipped);
    CHECK(r.available_count() * 100 >=
          static_cast<int>(r.candidates.size()) * 50);
}

TEST_CASE("thresholds rise by 3 dB until the X% floor is met") {
    ResourcePool pool = make_pool(0, 1, {100}, 50, -100.0, 100);
    const Slot n = 300;
    Step1Input in;
    in.window = {n, 3, 10};
    in.l_pssch = 1;
    in.own_priority = 4;
    // Reservations covering every window slot, strongest 8 dB above threshold.
    std::vector<SensedEntry> sensing;
    for (Slot s = n + 3; s <= n + 10; ++s) {
        SensedEntry e;
        e.slot = n - 50;
        e.rri_ms = 0;
        e.priority = 1;
        e.rsrp_dbm = -92.0 - static_cast<double>(s - n);  // -95 .. -102
        e.resources = {{s, 0, 1}};
        sensing.push_back(e);
    }
    const Step1Result r = step1_exclude(in, sensing, pool);
    CHECK(r.available_count() * 100 >= static_cast<int>(r.candidates.size()) * 50);
    CHECK(r.threshold_bump_db > 0);
}

TEST_CASE("step1 matches the brute-force oracle on random instances") {
    RngStream rng(2024, "oracle");
    for (int trial = 0; trial < 300; ++trial) {
        Instance inst = random_instance(rng);
        CAPTURE(trial);
        Step1Result got;
        try {
            got = step1_exclude(inst.in, inst.sensing, inst.pool);
        } catch (const EmptyWindowError&) {
            continue;  // no pool slots in a sparse-bitmap window
        }
        const oracle::Result want = oracle::step1(inst.in, inst.sensing, inst.pool);
        REQUIRE(got.candidates.size() == want.candidates.size());
        for (size_t i = 0; i < got.candidates.size(); ++i) {
            REQUIRE(got.candidates[i].abs_slot == want.candidates[i].abs_slot);
            REQUIRE(got.candidates[i].subchannel == want.candidates[i].subchannel);
            REQUIRE(got.available[i] == want.available[i]);
            REQUIRE(got.conflict_priority[i] == want.conflict_priority[i]);
        }
        CHECK(got.threshold_bump_db == want.bump);
        CHECK(got.half_duplex_skipped == want.hd_skipped);
        // X% floor invariant.
        const int x = inst.pool.x_percent_by_priority[static_cast<size_t>(
            inst.in.own_priority - 1)];
        CHECK(got.available_count() * 100 >=
              static_cast<int>(got.candidates.size()) * x);
    }
}

TEST_CASE("step2 draws the single resource uniformly") {
    std::vector<Candidate> avail;
    for (int i = 0; i < 50; ++i) avail.push_back({100 + i, 100 + i, 0, 1});
    RngStream rng(31, "step2");
    std::vector<int> counts(avail.size(), 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto sel = step2_select(avail, 1, {}, 0, rng);
        REQUIRE(sel.size() == 1);
        counts[static_cast<size_t>(sel[0].abs_slot - 100)] += 1;
    }
    const double expected = static_cast<double>(n) / avail.size();
    double stat = 0.0;
    for (int c : counts) stat += (c - expected) * (c - expected) / expected;
    CHECK(chi2_sf(stat, static_cast<int>(avail.size()) - 1) > 0.01);
}

TEST_CASE("step2 falls back to unconstrained selection when chaining is impossible") {
    std::vector<Candidate> avail = {{0, 0, 0, 1}, {40, 40, 0, 1}};
    RngStream rng(32, "step2b");
    for (int i = 0; i < 100; ++i) {
        const auto sel = step2_select(avail, 2, {}, 0, rng);
        REQUIRE(sel.size() == 2);
        std::set<Slot> slots{sel[0].abs_slot, sel[1].abs_slot};
        CHECK(slots == std::set<Slot>{0, 40});
    }
}

TEST_CASE("step2 chains selections within 31 slots when possible") {
    std::vector<Candidate> avail;
    for (int i = 0; i < 60; ++i) avail.push_back({i, i, 0, 1});
    RngStream rng(33, "step2c");
    for (int trial = 0; trial < 10000; ++trial) {
        const auto sel = step2_select(avail, 3, {}, 0, rng);
        REQUIRE(sel.size() == 3);
        for (const Candidate& c : sel) {
            bool linked = false;
            for (const Candidate& o : sel)
                if (&o != &c && std::llabs(o.abs_slot - c.abs_slot) <= 31) linked = true;
            CHECK(linked);
        }
    }
}

TEST_CASE("step2 honors the HARQ gap and never overlaps in a slot") {
    std::vector<Candidate> avail;
    for (int slot = 0; slot < 40; ++slot)
        for (int sc = 0; sc < 2; ++sc) avail.push_back({slot, slot, sc, 1});
    RngStream rng(34, "step2d");
    for (int trial = 0; trial < 5000; ++trial) {
        const auto sel = step2_select(avail, 3, {}, 7, rng);
        std::vector<Slot> slots;
        for (const Candidate& c : sel) slots.push_back(c.abs_slot);
        std::sort(slots.begin(), slots.end());
        for (size_t i = 1; i < slots.size(); ++i) CHECK(slots[i] - slots[i - 1] >= 7);
    }
    // Same slot without frequency overlap is allowed when no gap applies.
    for (int trial = 0; trial < 2000; ++trial) {
        const auto sel = step2_select(avail, 4, {}, 0, rng);
        for (size_t i = 0; i < sel.size(); ++i)
            for (size_t j = i + 1; j < sel.size(); ++j)
                if (sel[i].abs_slot == sel[j].abs_slot)
                    CHECK_FALSE(sel[i].as_resource().freq_overlaps(sel[j].as_resource()));
    }
    CHECK_THROWS_AS(step2_select(avail, 1000, {}, 0, rng), std::invalid_argument);
}

TEST_CASE("reselection counter ranges") {
    CHECK(reselection_counter_range(100) == std::pair<int, int>{5, 15});
    CHECK(reselection_counter_range(200) == std::pair<int, int>{5, 15});
    CHECK(reselection_counter_range(50) == std::pair<int, int>{10, 30});
    CHECK(reselection_counter_range(20) == std::pair<int, int>{25, 75});
    CHECK(reselection_counter_range(1) == std::pair<int, int>{25, 75});
    CHECK_THROWS_AS(reselection_counter_range(0), std::invalid_argument);

    RngStream rng(41, "counter");
    for (int rri : {100, 50, 20}) {
        const auto [lo, hi] = reselection_counter_range(rri);
        std::set<int> seen;
        for (int i = 0; i < 100000; ++i) {
            const int c = reselection_counter(rri, rng);
            CHECK(c >= lo);
            CHECK(c <= hi);
            seen.insert(c);
        }
        CHECK(static_cast<int>(seen.size()) == hi - lo + 1);
    }
}

TEST_CASE("tb cycle end bookkeeping") {
    RngStream rng(42, "cycle");
    GrantState g;
    g.rri_ms = 100;
    g.reselection_counter = 3;
    g.keep_probability = 0.0;
    CHECK(on_tb_cycle_end(g, rng) == CycleEnd::Keep);
    CHECK(g.reselection_counter == 2);
    g.reselection_counter = 1;
    CHECK(on_tb_cycle_end(g, rng) == CycleEnd::Reselect);

    // P = 0.8: keep frequency about 0.8, counter redrawn on keep.
    int kept = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        GrantState h;
        h.rri_ms = 100;
        h.reselection_counter = 1;
        h.keep_probability = 0.8;
        if (on_tb_cycle_end(h, rng) == CycleEnd::Keep) {
            ++kept;
            CHECK(h.reselection_counter >= 5);
            CHECK(h.reselection_counter <= 15);
        }
    }
    CHECK(std::abs(static_cast<double>(kept) / n - 0.8) < 0.01);
}

TEST_CASE("harq step truth tables") {
    // Unicast: ACK completes, dropping the reserved retransmissions.
    {
        HarqProcess p;
        p.cast = CastType::Unicast;
        p.feedback_enabled = true;
        p.n_total = 3;
        p.attempts_done = 1;
        p.group = {7};
        CHECK(harq_step(p, {{7, true}}) == HarqDecision::Done);
        CHECK(harq_step(p, {{7, false}}) == HarqDecision::Retransmit);
        CHECK(harq_step(p, {}) == HarqDecision::Retransmit);  // silence
        p.attempts_done = 3;
        CHECK(harq_step(p, {{7, false}}) == HarqDecision::Drop);
    }
    // Groupcast option 1: silence means done, any NACK retransmits.
    {
        HarqProcess p;
        p.cast = CastType::Groupcast;
        p.groupcast_option = 1;
        p.feedback_enabled = true;
        p.n_total = 3;
        p.attempts_done = 1;
        CHECK(harq_step(p, {}) == HarqDecision::Done);
        CHECK(harq_step(p, {{3, false}}) == HarqDecision::Retransmit);
        p.attempts_done = 3;
        CHECK(harq_step(p, {{3, false}}) == HarqDecision::Drop);
    }
    // Groupcast option 2: all members must ACK; ACKs accumulate.
    {
        HarqProcess p;
        p.cast = CastType::Groupcast;
        p.groupcast_option = 2;
        p.feedback_enabled = true;
        p.n_total = 4;
        p.attempts_done = 1;
        p.group = {1, 2, 3};
        CHECK(harq_step(p, {{1, true}, {2, true}}) == HarqDecision::Retransmit);
        p.attempts_done = 2;
        CHECK(harq_step(p, {{3, true}}) == HarqDecision::Done);
    }
    // One member silent: retransmit even when the others ACK.
    {
        HarqProcess p;
        p.cast = CastType::Groupcast;
        p.groupcast_option = 2;
        p.feedback_enabled = true;
        p.n_total = 2;
        p.attempts_done = 1;
        p.group = {1, 2, 3};
        CHECK(harq_step(p, {{1, true}, {2, true}}) == HarqDecision::Retransmit);
    }
    // Blind: always use all N resources.
    {
        HarqProcess p;
        p.feedback_enabled = false;
        p.n_total = 3;
        p.attempts_done = 1;
        CHECK(harq_step(p, {}) == HarqDecision::Retransmit);
        p.attempts_done = 3;
        CHECK(harq_step(p, {}) == HarqDecision::Done);
    }
}

TEST_CASE("option 1 NACK gate") {
    // TB decoded: never reply.
    CHECK_FALSE(option1_should_nack(true, true, 0, 200.0, {10.0, 10.0}, 5));
    // SCI not decoded: no reply ever.
    CHECK_FALSE(option1_should_nack(false, false, 0, 200.0, {10.0, 10.0}, 5));
    // TB failed within range: NACK.
    const Vec2 rx{100.0, 0.0};
    const int zone = zone_id({0.0, 0.0}, 5);
    CHECK(option1_should_nack(true, false, zone, 200.0, rx, 5));
    // Out of range: silent.
    CHECK_FALSE(option1_should_nack(true, false, zone, 50.0, rx, 5));
}

TEST_CASE("pre-emption priority gates") {
    ResourcePool pool = make_pool(0, 1, {100}, 20, -100.0);
    const Slot n = 300;
    Step1Input in;
    in.window = {n, 3, 20};
    in.l_pssch = 1;
    in.own_priority = 4;

    auto sense_with_priority = [&](int prio) {
        SensedEntry e;
        e.slot = n - 50;
        e.rri_ms = 0;
        e.priority = prio;
        e.rsrp_dbm = -90.0;
        e.resources = {{n + 10, 0, 1}};
        return e;
    };

    const std::vector<Candidate> pending = {{n + 10, n + 10, 0, 1}};

    // Conflicting priority lower than ours: keep.
    Step1Result s1 = step1_exclude(in, {sense_with_priority(6)}, pool);
    CHECK(excluded_pending(pending, s1) == std::vector<size_t>{0});
    CHECK(preempted_pending(pending, s1, 4, 0).empty());

    // Higher priority, no pool threshold: freed.
    s1 = step1_exclude(in, {sense_with_priority(2)}, pool);
    CHECK(preempted_pending(pending, s1, 4, 0) == std::vector<size_t>{0});

    // Higher than ours but not above the pool threshold: keep.
    CHECK(preempted_pending(pending, s1, 4, 1).empty());
    // Above both: freed.
    CHECK(preempted_pending(pending, s1, 4, 3) == std::vector<size_t>{0});

    // A half-duplex exclusion has no conflicting UE: never pre-empted.
    Step1Input own = in;
    own.own_tx_slots = {n - 90};
    ResourcePool pool100 = make_pool(0, 1, {100}, 20, -100.0);
    s1 = step1_exclude(own, {}, pool100);
    CHECK(excluded_pending(pending, s1) == std::vector<size_t>{0});
    CHECK(preempted_pending(pending, s1, 4, 0).empty());
}

TEST_CASE("t2min table lookup") {
    const std::vector<int> t2min = {1, 5, 10, 20, 20, 20, 20, 20};
    CHECK(t2min_slots(0, 1, t2min) == 1);
    CHECK(t2min_slots(2, 3, t2min) == 40);
    CHECK(t2min_slots(3, 4, t2min) == 160);
}
