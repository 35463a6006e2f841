#include "nrv2x/mac_mode2.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "nrv2x/numerology.hpp"

namespace nrv2x {

namespace {

bool freq_overlap(int a_start, int a_count, int b_start, int b_count) {
    return a_start < b_start + b_count && b_start < a_start + a_count;
}

// Estimated periodic repetitions to project for a reservation interval:
// ceil(T2/RRI) when the RRI is shorter than T2 and the observation is at
// most one RRI old, otherwise a single occurrence.
int q_count(double rri_ms, std::int64_t rri_slots, Slot n, Slot anchor, double t2_ms) {
    if (rri_ms < t2_ms && (n - anchor) <= rri_slots)
        return static_cast<int>(std::ceil(t2_ms / rri_ms - 1e-12));
    return 1;
}

struct ExclusionPass {
    std::vector<uint8_t> available;
    std::vector<int> conflict_priority;
};

}  // namespace

Step1Result step1_exclude(const Step1Input& in, const std::vector<SensedEntry>& sensing,
                          const ResourcePool& pool) {
    const int mu = pool.numerology.mu;
    const Slot n = in.window.trigger;
    if (in.window.t2_slots < in.window.t1_slots)
        throw EmptyWindowError("step1: empty selection window (T2 < T1)");

    Step1Result out;
    for (Slot abs = n + in.window.t1_slots; abs <= n + in.window.t2_slots; ++abs) {
        const auto ps = pool_slot_index(abs, pool);
        if (!ps) continue;
        for (int start = 0; start + in.l_pssch <= pool.num_subchannels; ++start)
            out.candidates.push_back({abs, *ps, start, in.l_pssch});
    }
    if (out.candidates.empty())
        throw EmptyWindowError("step1: no pool slots inside the selection window");

    const double t2_ms = static_cast<double>(in.window.t2_slots) / (1 << mu);
    const Slot sensing_begin = n - pool.numerology.ms_to_slots(pool.t0_ms);
    const Slot sensing_end = n - t_proc0_slots(mu);  // exclusive

    // Half-duplex projections: every slot the UE could not sense, repeated
    // over every permitted RRI.
    std::unordered_set<Slot> own_masked;
    for (Slot s : in.own_tx_slots) {
        if (s < sensing_begin || s >= sensing_end) continue;
        for (int rri_ms : pool.rri_list_ms) {
            if (rri_ms <= 0) continue;
            const std::int64_t rri_slots = pool.numerology.ms_to_slots(rri_ms);
            const int q_max = q_count(rri_ms, rri_slots, n, s, t2_ms);
            for (int q = 1; q <= q_max; ++q) own_masked.insert(s + q * rri_slots);
        }
    }

    const std::int64_t rri_tx_slots =
        in.rri_tx_ms > 0 ? pool.numerology.ms_to_slots(in.rri_tx_ms) : 0;
    const std::int64_t j_max =
        in.rri_tx_ms > 0 ? 10 * static_cast<std::int64_t>(in.reselection_counter) - 1 : 0;

    auto run_pass = [&](bool use_half_duplex, double bump_db) {
        ExclusionPass pass;
        pass.available.assign(out.candidates.size(), 1);
        pass.conflict_priority.assign(out.candidates.size(), 0);

        if (use_half_duplex && !own_masked.empty()) {
            for (size_t i = 0; i < out.candidates.size(); ++i) {
                const Candidate& c = out.candidates[i];
                if (own_masked.count(c.abs_slot)) {
                    pass.available[i] = 0;
                    continue;
                }
                // Semi-persistent: exclude slots whose own future repetitions
                // would land on a masked slot.
                for (std::int64_t j = 1; j <= j_max; ++j) {
                    if (own_masked.count(c.abs_slot + j * rri_tx_slots)) {
                        pass.available[i] = 0;
                        break;
                    }
                }
            }
        }

        for (const SensedEntry& e : sensing) {
            if (e.slot < sensing_begin || e.slot >= sensing_end) continue;
            const double th =
                pool.rsrp_threshold_dbm[static_cast<size_t>(in.own_priority - 1)]
                                       [static_cast<size_t>(e.priority - 1)] +
                bump_db;
            if (!(e.rsrp_dbm > th)) continue;

            const std::int64_t rri_rx_slots =
                e.rri_ms > 0 ? pool.numerology.ms_to_slots(e.rri_ms) : 0;
            const int q_max =
                e.rri_ms > 0 ? q_count(e.rri_ms, rri_rx_slots, n, e.slot, t2_ms) : 0;

            for (const SensedResource& r : e.resources) {
                // Occurrences of this reserved resource: the signaled slot
                // itself plus its periodic repetitions.
                std::unordered_set<Slot> occ;
                occ.insert(r.slot);
                for (int q = 1; q <= q_max; ++q) occ.insert(r.slot + q * rri_rx_slots);

                for (size_t i = 0; i < out.candidates.size(); ++i) {
                    const Candidate& c = out.candidates[i];
                    if (!freq_overlap(c.subchannel, c.num_subchannels, r.subchannel,
                                      r.num_subchannels))
                        continue;
                    bool hit = occ.count(c.abs_slot) > 0;
                    if (!hit && j_max > 0) {
                        for (std::int64_t j = 1; j <= j_max && !hit; ++j)
                            hit = occ.count(c.abs_slot + j * rri_tx_slots) > 0;
                    }
                    if (hit) {
                        pass.available[i] = 0;
                        if (pass.conflict_priority[i] == 0 ||
                            higher_priority(e.priority, pass.conflict_priority[i]))
                            pass.conflict_priority[i] = e.priority;
                    }
                }
            }
        }
        return pass;
    };

    const int x_pct = pool.x_percent_by_priority[static_cast<size_t>(in.own_priority - 1)];
    const auto total = static_cast<std::int64_t>(out.candidates.size());
    auto meets_floor = [&](const ExclusionPass& p) {
        std::int64_t avail = 0;
        for (uint8_t a : p.available) avail += a;
        return avail * 100 >= total * x_pct;
    };

    // When the half-duplex exclusions alone break the X% floor, no amount of
    // threshold raising can restore it; drop them entirely.
    bool use_hd = true;
    {
        ExclusionPass hd_only = run_pass(true, 1e9);
        if (!meets_floor(hd_only)) {
            use_hd = false;
            out.half_duplex_skipped = true;
        }
    }

    int bump = 0;
    for (;;) {
        ExclusionPass pass = run_pass(use_hd, bump);
        if (meets_floor(pass)) {
            out.available = std::move(pass.available);
            out.conflict_priority = std::move(pass.conflict_priority);
            out.threshold_bump_db = bump;
            return out;
        }
        bump += 3;
        if (bump > 100000)
            throw std::logic_error("step1: X% floor unreachable");  // unreachable by construction
    }
}

std::vector<Candidate> step2_select(const std::vector<Candidate>& available, int n,
                                    const std::vector<Candidate>& preselected,
                                    int t_gap_slots, RngStream& rng) {
    if (n > static_cast<int>(available.size()))
        throw std::invalid_argument("step2: N exceeds the available candidate count");

    std::vector<Candidate> picked = preselected;
    std::vector<Candidate> chosen;

    auto feasible = [&](const Candidate& c) {
        for (const Candidate& p : picked) {
            if (c.abs_slot == p.abs_slot) {
                if (freq_overlap(c.subchannel, c.num_subchannels, p.subchannel,
                                 p.num_subchannels))
                    return false;
                if (t_gap_slots > 0) return false;  // zero gap between consecutive selections
            } else if (std::llabs(c.abs_slot - p.abs_slot) < t_gap_slots) {
                return false;
            }
        }
        return true;
    };
    auto chained = [&](const Candidate& c) {
        for (const Candidate& p : picked)
            if (std::llabs(c.abs_slot - p.abs_slot) <= 31) return true;
        return false;
    };

    for (int k = 0; k < n; ++k) {
        std::vector<size_t> pool_feasible;
        std::vector<size_t> pool_chained;
        for (size_t i = 0; i < available.size(); ++i) {
            if (!feasible(available[i])) continue;
            pool_feasible.push_back(i);
            if (!picked.empty() && chained(available[i])) pool_chained.push_back(i);
        }
        const std::vector<size_t>& from =
            !picked.empty() && !pool_chained.empty() ? pool_chained : pool_feasible;
        if (from.empty()) break;  // hard constraints exhausted the set
        const size_t idx = from[static_cast<size_t>(rng.uniform_int(
            0, static_cast<std::int64_t>(from.size()) - 1))];
        chosen.push_back(available[idx]);
        picked.push_back(available[idx]);
    }
    return chosen;
}

std::pair<int, int> reselection_counter_range(int rri_ms) {
    if (rri_ms <= 0)
        throw std::invalid_argument("reselection_counter: dynamic scheme has no counter");
    double c = 1.0;
    if (rri_ms < 100) c = 100.0 / std::max(20, rri_ms);
    const int lo = static_cast<int>(std::ceil(5.0 * c - 1e-9));
    const int hi = static_cast<int>(std::floor(15.0 * c + 1e-9));
    return {lo, hi};
}

int reselection_counter(int rri_ms, RngStream& rng) {
    const auto [lo, hi] = reselection_counter_range(rri_ms);
    return static_cast<int>(rng.uniform_int(lo, hi));
}

CycleEnd on_tb_cycle_end(GrantState& grant, RngStream& rng) {
    grant.reselection_counter -= 1;
    if (grant.reselection_counter > 0) return CycleEnd::Keep;
    if (rng.uniform() < grant.keep_probability) {
        grant.reselection_counter = reselection_counter(grant.rri_ms, rng);
        return CycleEnd::Keep;
    }
    return CycleEnd::Reselect;
}

namespace {

std::optional<size_t> find_candidate(const std::vector<Candidate>& haystack, const Candidate& c) {
    for (size_t i = 0; i < haystack.size(); ++i) {
        if (haystack[i].abs_slot == c.abs_slot && haystack[i].subchannel == c.subchannel &&
            haystack[i].num_subchannels == c.num_subchannels)
            return i;
    }
    return std::nullopt;
}

}  // namespace

std::vector<size_t> excluded_pending(const std::vector<Candidate>& pending,
                                     const Step1Result& s1) {
    std::vector<size_t> out;
    for (size_t i = 0; i < pending.size(); ++i) {
        const auto idx = find_candidate(s1.candidates, pending[i]);
        if (idx && !s1.available[*idx]) out.push_back(i);
    }
    return out;
}

std::vector<size_t> preempted_pending(const std::vector<Candidate>& pending,
                                      const Step1Result& s1, int own_priority,
                                      int pool_priority_threshold) {
    std::vector<size_t> out;
    for (size_t i = 0; i < pending.size(); ++i) {
        const auto idx = find_candidate(s1.candidates, pending[i]);
        if (!idx || s1.available[*idx]) continue;
        const int conflict = s1.conflict_priority[*idx];
        if (conflict == 0) continue;  // half-duplex exclusion, nobody to yield to
        if (!higher_priority(conflict, own_priority)) continue;
        if (pool_priority_threshold > 0 && !higher_priority(conflict, pool_priority_threshold))
            continue;
        out.push_back(i);
    }
    return out;
}

HarqDecision harq_step(HarqProcess& p, const std::vector<HarqFeedbackEvent>& events) {
    if (!p.feedback_enabled)
        return p.attempts_done < p.n_total ? HarqDecision::Retransmit : HarqDecision::Done;

    const bool exhausted = p.attempts_done >= p.n_total;
    switch (p.cast) {
        case CastType::Unicast: {
            for (const auto& e : events)
                if (e.ack) return HarqDecision::Done;
            return exhausted ? HarqDecision::Drop : HarqDecision::Retransmit;
        }
        case CastType::Groupcast: {
            if (p.groupcast_option == 1) {
                bool nack = false;
                for (const auto& e : events) nack = nack || !e.ack;
                if (!nack) return HarqDecision::Done;  // silence means success in range
                return exhausted ? HarqDecision::Drop : HarqDecision::Retransmit;
            }
            for (const auto& e : events)
                if (e.ack) p.acked.insert(e.from);
            bool all = true;
            for (UeId m : p.group) all = all && p.acked.count(m) > 0;
            if (all) return HarqDecision::Done;
            return exhausted ? HarqDecision::Drop : HarqDecision::Retransmit;
        }
        case CastType::Broadcast:
            return p.attempts_done < p.n_total ? HarqDecision::Retransmit : HarqDecision::Done;
    }
    return HarqDecision::Done;
}

bool option1_should_nack(bool sci_decoded, bool tb_decoded, int tx_zone_id, double range_m,
                         const Vec2& rx_pos, int zone_side_m) {
    if (!sci_decoded || tb_decoded) return false;
    return zone_distance(rx_pos, tx_zone_id, zone_side_m) <= range_m;
}

int t2min_slots(int mu, int priority, const std::vector<int>& t2min_ms_by_priority) {
    const int ms = t2min_ms_by_priority.at(static_cast<size_t>(priority - 1));
    return ms * (1 << mu);
}

}  // namespace nrv2x
