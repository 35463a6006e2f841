#include "nrv2x/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "nrv2x/channel.hpp"
#include "nrv2x/congestion.hpp"
#include "nrv2x/numerology.hpp"
#include "nrv2x/power.hpp"
#include "nrv2x/radio.hpp"
#include "nrv2x/rng.hpp"
#include "nrv2x/sync.hpp"

namespace nrv2x {

namespace {

// Pool-slot <-> absolute-slot maps cached per run (the free functions in
// resource_pool.cpp rebuild the period tables on every call).
struct PoolSlotCache {
    std::int64_t period = 0;
    std::vector<std::int64_t> offsets;          // sidelink offsets within one period
    std::vector<std::int64_t> ordinal_prefix;   // per in-period offset k: ordinals before k
    std::vector<uint8_t> bit;                   // per in-period offset k

    explicit PoolSlotCache(const ResourcePool& pool) {
        period = pool.period_slots();
        bit.resize(static_cast<size_t>(period));
        ordinal_prefix.resize(static_cast<size_t>(period));
        const auto len = static_cast<std::int64_t>(pool.slot_bitmap.size());
        std::int64_t count = 0;
        for (std::int64_t k = 0; k < period; ++k) {
            ordinal_prefix[static_cast<size_t>(k)] = count;
            const bool b = pool.slot_bitmap[static_cast<size_t>(k % len)] != 0;
            bit[static_cast<size_t>(k)] = b ? 1 : 0;
            if (b) {
                offsets.push_back(k);
                ++count;
            }
        }
    }

    std::int64_t per_period() const { return static_cast<std::int64_t>(offsets.size()); }

    std::optional<Slot> ordinal(Slot abs) const {
        if (abs < 0) return std::nullopt;
        const std::int64_t k = abs % period;
        if (!bit[static_cast<size_t>(k)]) return std::nullopt;
        return (abs / period) * per_period() + ordinal_prefix[static_cast<size_t>(k)];
    }

    Slot absolute(Slot ordinal_slot) const {
        const std::int64_t p = ordinal_slot / per_period();
        const std::int64_t r = ordinal_slot % per_period();
        return p * period + offsets[static_cast<size_t>(r)];
    }
};

struct PendingResource {
    Candidate cand;
    bool announced = false;
    bool congestion_dropped = false;
};

struct ActiveTb {
    PacketDescriptor pkt;
    std::uint64_t tb_id = 0;
    std::vector<PendingResource> resources;  // time-ordered
    size_t next = 0;
    HarqProcess harq;
    int mcs = 0;
    int l_pssch = 1;
    Slot deadline = 0;
    int attempts = 0;
    bool finished = false;
    bool announce_rri_zero = false;          // final cycle of a reselecting grant
    std::optional<Slot> last_tx_pool_slot;   // pool slot of the latest attempt
};

struct PendingFeedback {
    Slot psfch_abs_slot = 0;
    UeId to = 0;    // the PSSCH transmitter expecting the feedback
    UeId from = 0;  // the replying receiver
    bool ack = false;
    int priority = 4;
    PsfchResource resource;
};

struct UeState {
    UeId id = 0;
    TrafficGenerator gen;
    double next_arrival_ms = 0.0;
    std::uint64_t packet_seq = 0;
    std::deque<PacketDescriptor> queue;
    std::deque<SensedEntry> sensing;
    std::deque<Slot> own_tx;
    std::optional<GrantState> grant;
    std::optional<CycleEnd> final_cycle_decision;
    std::optional<ActiveTb> tb;
    RngStream mac_rng;
    RngStream rx_rng;
    CbrMeter cbr;
    std::deque<std::pair<Slot, int>> cr_used;
    TxKnobs knobs;
    std::map<UeId, RsrpAverager> reported_rsrp;  // averaged RSRP fed back per peer
    RsrpAverager own_dmrs_psd;
    // sync state
    SyncSelection sync_sel;
    SlssIdentity slss{0, false};
    bool is_syncref = false;
    std::uint64_t sync_root = 0;

    UeState(std::uint64_t seed, UeId uid, TrafficModel model)
        : id(uid),
          gen(model, RngStream(seed, "traffic", uid)),
          mac_rng(seed, "mac", uid),
          rx_rng(seed, "rx", uid) {}
};

struct OnAir {
    UeId tx = 0;
    std::uint64_t tb_id = 0;
    std::uint64_t packet_id = 0;
    int attempt = 0;
    SlotResource res;
    PrbSpan span;
    double pssch_power_dbm = 0.0;  // over M_PSSCH PRBs
    double psd_dbm_per_prb = 0.0;
    ControlMessage sci;
    Slot gen_slot = 0;
    int pdb_slots = 0;
    int size_bytes = 0;
    int mcs = 0;
    Vec2 pos;
    double antenna_h = 1.6;
    bool feedback_enabled = false;
};

struct RxShardResult {
    std::vector<RxTraceRow> rows;
    std::vector<SensedEntry> new_sensing;
    std::vector<PendingFeedback> new_duties;
    std::vector<std::pair<UeId, double>> rsrp_reports;  // (tx, rsrp) from this rx
    struct Delivery {
        std::uint64_t tb_id;
        Slot slot;
        double dist;
        bool within_pdb;
    };
    std::vector<Delivery> deliveries;
    int busy_subchannels = 0;
};

std::string resource_string(const std::vector<PendingResource>& rs) {
    std::string s;
    for (size_t i = 0; i < rs.size(); ++i) {
        if (i) s += '|';
        s += std::to_string(rs[i].cand.abs_slot) + ':' +
             std::to_string(rs[i].cand.subchannel) + ':' +
             std::to_string(rs[i].cand.num_subchannels);
    }
    return s;
}

}  // namespace

struct SimEngine::Impl {
    SimConfig cfg;
    Numerology num;
    ResourcePool pool;
    PoolSlotCache slot_cache;
    RoadLayout layout;
    std::vector<Vehicle> vehicles;
    ChannelModel chan;
    NoiseModel noise;
    LinkAbstraction link;
    DecodeModel decode_model;
    double slot_ms;
    double slot_s;
    Slot total_slots;
    Slot warmup_slots;
    int t_gap;
    RngStream mobility_rng;
    std::vector<UeState> ues;
    std::vector<std::map<UeId, LinkProcess>> links_by_rx;  // [rx][tx]
    std::map<Slot, std::vector<PendingFeedback>> feedback_by_slot;
    std::vector<PacketRecord> records;
    std::map<std::uint64_t, size_t> record_of_packet;
    std::map<std::uint64_t, size_t> record_of_tb;
    std::vector<std::pair<double, double>> cbr_cr_samples;
    std::uint64_t next_tb_id = 1;
    // counters
    long tx_attempts = 0;
    long receptions_traced = 0;
    long congestion_drops = 0;
    long pdb_drops = 0;
    long reselections = 0;
    long reeval_replacements = 0;
    long preempt_releases = 0;

    explicit Impl(SimConfig c)
        : cfg(std::move(c)),
          num(cfg.numerology()),
          pool([&] {
              ResourcePool p = cfg.pool;
              p.numerology = cfg.numerology();
              return p;
          }()),
          slot_cache(pool),
          layout(cfg.layout),
          chan(cfg.channel),
          noise(cfg.radio.noise),
          link(cfg.radio.link),
          decode_model([&] {
              DecodeModel m = make_decode_model(cfg.radio.link);
              m.soft = cfg.radio.soft_decode;
              m.soft_slope_db = cfg.radio.soft_slope_db;
              return m;
          }()),
          slot_ms(num.slot_duration_ms()),
          slot_s(slot_ms / 1000.0),
          total_slots(static_cast<Slot>(std::llround(cfg.duration_s * 1000.0 / slot_ms))),
          warmup_slots(static_cast<Slot>(std::llround(cfg.warmup_s * 1000.0 / slot_ms))),
          t_gap(pool.effective_t_gap()),
          mobility_rng(cfg.seed, "mobility") {
        RngStream drop_rng(cfg.seed, "dropping");
        vehicles = drop_vehicles(layout, cfg.dropping, drop_rng);
        links_by_rx.resize(vehicles.size());
        for (size_t i = 0; i < vehicles.size(); ++i) {
            ues.emplace_back(cfg.seed, static_cast<UeId>(i), cfg.traffic.model);
            ues.back().next_arrival_ms = ues.back().gen.initial_phase_ms();
            ues.back().cbr = CbrMeter(cfg.congestion.cbr_window_slots(cfg.mu),
                                      pool.num_subchannels);
            ues.back().knobs = initial_knobs();
            ues.back().sync_root = 1000000 + i;  // own clock until sync runs
        }
    }

    TxKnobs initial_knobs() const {
        TxKnobs k;
        k.min_mcs = 0;
        k.max_l_pssch = pool.num_subchannels;
        k.n_max = pool.n_max;
        return k;
    }

    LinkProcess& link_process(UeId rx, UeId tx) {
        auto& m = links_by_rx[rx];
        auto it = m.find(tx);
        if (it == m.end())
            it = m.emplace(tx, LinkProcess(cfg.seed, tx, rx, chan)).first;
        return it->second;
    }

    LinkGeometry geometry(UeId tx, UeId rx) const {
        const Vehicle& t = vehicles[tx];
        const Vehicle& r = vehicles[rx];
        LinkGeometry g;
        g.tx_pos = t.xy;
        g.tx_height = t.antenna_height();
        g.rx_pos = r.xy;
        g.rx_height = r.antenna_height();
        g.same_street = layout.same_street(t.xy, r.xy);
        if (chan.geometric_blockers && g.same_street)
            g.blocker_height = tallest_blocker(vehicles, tx, rx);
        return g;
    }

    std::optional<double> dl_pathloss(UeId ue) const {
        if (cfg.gnb.anchors.empty()) return std::nullopt;
        const Vehicle& v = vehicles[ue];
        double best = 1e18;
        for (const Vec3& a : cfg.gnb.anchors) {
            const double d = distance_3d(v.xy, v.antenna_height(), {a.x, a.y}, a.z);
            best = std::min(best, std::max(d, 1.0));
        }
        return pathloss_db(LinkState::Nlos, best, cfg.carrier_ghz, chan.scenario);
    }

    bool in_coverage(UeId ue) const {
        const auto pl = dl_pathloss(ue);
        if (!pl) return false;
        return cfg.gnb.tx_power_dbm - *pl >= cfg.gnb.coverage_rsrp_dbm;
    }

    // ---- traffic ----------------------------------------------------------

    void generate_traffic(UeState& u, Slot t) {
        const double slot_end_ms = static_cast<double>(t + 1) * slot_ms;
        while (u.next_arrival_ms < slot_end_ms) {
            Arrival a = u.gen.next();
            PacketDescriptor p;
            p.packet_id = (static_cast<std::uint64_t>(u.id) << 32) | u.packet_seq++;
            p.source = u.id;
            p.generation_slot = t;
            p.payload_bytes = a.payload_bytes;
            p.pdb_ms = a.pdb_ms;
            p.priority = cfg.traffic.priority;
            p.cast = cfg.traffic.cast;
            if (p.cast == CastType::Groupcast) {
                p.group.harq_option = cfg.traffic.groupcast_option;
                p.group.range_m = cfg.traffic.groupcast_range_m;
                p.group.members = nearest_ues(u.id, cfg.traffic.groupcast_k_nearest);
            } else if (p.cast == CastType::Unicast) {
                auto near = nearest_ues(u.id, 1);
                p.unicast_peer = near.empty() ? u.id : near[0];
            }
            PacketRecord r;
            r.packet_id = p.packet_id;
            r.tx = p.source;
            r.generation_slot = p.generation_slot;
            r.size_bytes = p.payload_bytes;
            r.pdb_slots = num.ms_to_slots(p.pdb_ms);
            r.cast = p.cast;
            record_of_packet[p.packet_id] = records.size();
            records.push_back(r);
            u.queue.push_back(p);
            u.next_arrival_ms += a.inter_arrival_ms;
        }
    }

    std::vector<UeId> nearest_ues(UeId from, int k) const {
        std::vector<std::pair<double, UeId>> d;
        for (size_t i = 0; i < vehicles.size(); ++i) {
            if (i == from) continue;
            d.push_back({(vehicles[i].xy - vehicles[from].xy).norm(), static_cast<UeId>(i)});
        }
        std::sort(d.begin(), d.end());
        std::vector<UeId> out;
        for (int i = 0; i < k && i < static_cast<int>(d.size()); ++i) out.push_back(d[i].second);
        std::sort(out.begin(), out.end());
        return out;
    }

    // ---- mode 2 -----------------------------------------------------------

    int pdb_slots_of(const PacketDescriptor& p) const { return num.ms_to_slots(p.pdb_ms); }

    int choose_rri() const {
        if (!pool.sps_enabled) return 0;
        const double period = traffic_period_ms(cfg.traffic.model);
        int best = 0;
        double best_diff = 1e18;
        for (int rri : pool.rri_list_ms) {
            if (rri <= 0) continue;
            const double diff = cfg.mode2.preferred_rri_from_traffic
                                    ? std::abs(rri - period)
                                    : static_cast<double>(rri);
            if (diff < best_diff) {
                best_diff = diff;
                best = rri;
            }
        }
        return best;
    }

    SelectionWindow make_window(Slot n, Slot deadline, int priority) const {
        SelectionWindow w;
        w.trigger = n;
        w.t1_slots = t_proc1_slots(cfg.mu);
        Slot t2 = deadline - n;
        if (cfg.mode2.t2_ms) t2 = std::min<Slot>(t2, num.ms_to_slots(*cfg.mode2.t2_ms));
        const Slot t2min =
            std::min<Slot>(t2min_slots(cfg.mu, priority, cfg.mode2.t2min_ms), deadline - n);
        t2 = std::max<Slot>(t2, t2min);
        w.t2_slots = static_cast<int>(t2);
        return w;
    }

    Step1Input make_step1_input(const UeState& u, const SelectionWindow& w, int l_pssch,
                                int priority, int rri_tx, int counter) const {
        Step1Input in;
        in.window = w;
        in.l_pssch = l_pssch;
        in.own_priority = priority;
        in.rri_tx_ms = rri_tx;
        in.reselection_counter = counter;
        in.own_tx_slots.assign(u.own_tx.begin(), u.own_tx.end());
        return in;
    }

    // Starts the next TB for this UE at slot t, reusing the semi-persistent
    // grant when it fits and meets the deadline, otherwise running the
    // 2-step selection.
    void start_tb(UeState& u, Slot t, TraceSink& sink) {
        PacketDescriptor pkt = u.queue.front();
        const Slot deadline = pkt.generation_slot + pdb_slots_of(pkt);
        if (deadline <= t) return;  // expiry handled by the caller

        const auto fit0 = fit_tb(link, static_cast<std::int64_t>(pkt.payload_bytes) * 8,
                                 std::min(u.knobs.max_l_pssch, pool.num_subchannels),
                                 pool.subchannel_prbs, pool.pscch.prbs, pool.pscch.symbols,
                                 u.knobs.min_mcs);
        if (!fit0) {
            u.queue.pop_front();
            pdb_drops += 1;  // cannot fit under current knobs; count with drops
            MacTraceRow row{t, u.id, "drop_unfit", "", 0, 0, "tb does not fit"};
            sink.on_mac(row);
            return;
        }

        // Try the existing grant: same sub-channel width, next cycle's slots
        // must start after t and end before the deadline.
        if (u.grant && !u.grant->resources.empty()) {
            const int gl = u.grant->resources.front().num_subchannels;
            const auto gfit = fit_tb(link, static_cast<std::int64_t>(pkt.payload_bytes) * 8, gl,
                                     pool.subchannel_prbs, pool.pscch.prbs, pool.pscch.symbols,
                                     u.knobs.min_mcs);
            bool ok = gfit.has_value();
            std::vector<Candidate> shifted;
            if (ok) {
                const std::int64_t step = num.ms_to_slots(u.grant->rri_ms);
                for (const Candidate& c : u.grant->resources) {
                    Candidate s = c;
                    while (s.abs_slot < t) s.abs_slot += step;
                    const auto ord = slot_cache.ordinal(s.abs_slot);
                    if (!ord) {
                        ok = false;
                        break;
                    }
                    s.pool_slot = *ord;
                    shifted.push_back(s);
                }
                if (ok) {
                    std::sort(shifted.begin(), shifted.end(),
                              [](const Candidate& a, const Candidate& b) {
                                  return a.abs_slot < b.abs_slot;
                              });
                    ok = shifted.front().abs_slot >= t && shifted.back().abs_slot < deadline;
                }
            }
            if (ok) {
                u.grant->resources = shifted;
                begin_tb(u, t, pkt, shifted, *gfit, deadline, sink, "grant");
                return;
            }
            // Grant unusable for this TB: reselect.
            u.grant.reset();
            u.final_cycle_decision.reset();
        }

        // Fresh selection.
        const int rri = choose_rri();
        int counter = rri > 0 ? reselection_counter(rri, u.mac_rng) : 0;
        SelectionWindow w = make_window(t, deadline, pkt.priority);
        Step1Result s1;
        const std::vector<SensedEntry> sensing_snapshot(u.sensing.begin(), u.sensing.end());
        try {
            s1 = step1_exclude(make_step1_input(u, w, fit0->l_pssch, pkt.priority, rri, counter),
                               sensing_snapshot, pool);
        } catch (const EmptyWindowError&) {
            u.queue.pop_front();
            pdb_drops += 1;
            sink.on_mac({t, u.id, "drop_window", "", rri, counter, "empty selection window"});
            return;
        }
        const auto avail = s1.available_candidates();
        const int n = std::min({cfg.mode2.num_transmissions, u.knobs.n_max,
                                static_cast<int>(avail.size())});
        if (n == 0) {
            u.queue.pop_front();
            pdb_drops += 1;
            sink.on_mac({t, u.id, "drop_no_resources", "", rri, counter, "no candidates"});
            return;
        }
        std::vector<Candidate> sel = step2_select(avail, n, {}, t_gap, u.mac_rng);
        std::sort(sel.begin(), sel.end(),
                  [](const Candidate& a, const Candidate& b) { return a.abs_slot < b.abs_slot; });
        if (rri > 0) {
            GrantState g;
            g.resources = sel;
            g.rri_ms = rri;
            g.reselection_counter = counter;
            g.keep_probability = cfg.mode2.keep_probability;
            g.priority = pkt.priority;
            u.grant = g;
            u.final_cycle_decision.reset();
        } else {
            u.grant.reset();
        }
        reselections += 1;
        begin_tb(u, t, pkt, sel, *fit0, deadline, sink, "select");
    }

    void begin_tb(UeState& u, Slot t, const PacketDescriptor& pkt,
                  const std::vector<Candidate>& resources, McsFit fit, Slot deadline,
                  TraceSink& sink, const std::string& how) {
        ActiveTb tb;
        tb.pkt = pkt;
        tb.tb_id = next_tb_id++;
        for (const Candidate& c : resources) tb.resources.push_back({c, false, false});
        tb.mcs = fit.mcs;
        tb.l_pssch = fit.l_pssch;
        tb.deadline = deadline;
        tb.harq.attempts_done = 0;
        tb.harq.n_total = static_cast<int>(resources.size());
        tb.harq.cast = pkt.cast;
        tb.harq.groupcast_option = pkt.group.harq_option;
        tb.harq.feedback_enabled = cfg.traffic.harq_feedback && pkt.cast != CastType::Broadcast;
        if (pkt.cast == CastType::Groupcast)
            tb.harq.group.insert(pkt.group.members.begin(), pkt.group.members.end());
        if (pkt.cast == CastType::Unicast) tb.harq.group.insert(pkt.unicast_peer);

        // The keep/reselect decision for the final counter cycle is taken
        // before the last TB so its SCIs can announce RRI = 0.
        if (u.grant && u.grant->reselection_counter == 1 && !u.final_cycle_decision) {
            u.final_cycle_decision = on_tb_cycle_end(*u.grant, u.mac_rng);
            if (*u.final_cycle_decision == CycleEnd::Reselect) tb.announce_rri_zero = true;
        }

        u.queue.pop_front();
        u.tb = std::move(tb);
        record_of_tb[u.tb->tb_id] = record_of_packet.at(u.tb->pkt.packet_id);
        sink.on_mac({t, u.id, how, resource_string(u.tb->resources),
                     u.grant ? u.grant->rri_ms : 0,
                     u.grant ? u.grant->reselection_counter : 0, ""});
    }

    // Re-evaluation / pre-emption pass for pending resources due a check.
    void recheck_resources(UeState& u, Slot t, TraceSink& sink) {
        if (!u.tb || u.tb->finished) return;
        const int t3 = t_proc1_slots(cfg.mu);
        std::vector<size_t> due;
        for (size_t i = u.tb->next; i < u.tb->resources.size(); ++i) {
            const Slot m = u.tb->resources[i].cand.abs_slot;
            if (cfg.mode2.reevaluation == ReevaluationPolicy::EverySlot ? (t < m)
                                                                        : (t == m - t3))
                due.push_back(i);
        }
        if (due.empty()) return;

        SelectionWindow w = make_window(t, u.tb->deadline, u.tb->pkt.priority);
        if (w.t2_slots < w.t1_slots) return;
        const int rri = u.grant ? u.grant->rri_ms : 0;
        const int counter = u.grant ? u.grant->reselection_counter : 0;
        Step1Result s1;
        const std::vector<SensedEntry> sensing_snapshot(u.sensing.begin(), u.sensing.end());
        try {
            s1 = step1_exclude(
                make_step1_input(u, w, u.tb->l_pssch, u.tb->pkt.priority, rri, counter),
                sensing_snapshot, pool);
        } catch (const EmptyWindowError&) {
            return;
        }

        std::vector<Candidate> due_cands;
        for (size_t i : due) due_cands.push_back(u.tb->resources[i].cand);
        std::vector<size_t> replace;
        for (size_t k : excluded_pending(due_cands, s1)) {
            const size_t idx = due[k];
            if (!u.tb->resources[idx].announced) {
                replace.push_back(idx);  // re-evaluation
            } else if (pool.preemption_enabled) {
                // Pre-emption: only yield to higher-priority reservations.
                const auto pre = preempted_pending({due_cands[k]}, s1, u.tb->pkt.priority,
                                                   pool.preemption_priority_threshold);
                if (!pre.empty()) {
                    replace.push_back(idx);
                    preempt_releases += 1;
                }
            }
        }
        if (replace.empty()) return;

        std::vector<Candidate> kept;
        for (size_t i = u.tb->next; i < u.tb->resources.size(); ++i)
            if (std::find(replace.begin(), replace.end(), i) == replace.end())
                kept.push_back(u.tb->resources[i].cand);
        const auto avail = s1.available_candidates();
        const int m = std::min<int>(static_cast<int>(replace.size()),
                                    static_cast<int>(avail.size()));
        std::vector<Candidate> fresh = step2_select(avail, m, kept, t_gap, u.mac_rng);

        // Rebuild the pending tail: kept + fresh, time-ordered.
        std::vector<Candidate> tail = kept;
        tail.insert(tail.end(), fresh.begin(), fresh.end());
        std::sort(tail.begin(), tail.end(),
                  [](const Candidate& a, const Candidate& b) { return a.abs_slot < b.abs_slot; });
        u.tb->resources.resize(u.tb->next);
        for (const Candidate& c : tail) u.tb->resources.push_back({c, false, false});
        u.tb->harq.n_total = u.tb->attempts + static_cast<int>(tail.size());
        reeval_replacements += static_cast<long>(fresh.size());
        sink.on_mac({t, u.id, "reevaluate", resource_string(u.tb->resources), rri, counter,
                     std::to_string(replace.size()) + " replaced"});
    }

    // Congestion enforcement ahead of the next scheduled (re)transmission.
    void congestion_check(UeState& u, Slot t, TraceSink& sink) {
        if (!cfg.congestion.enabled || !u.tb || u.tb->finished) return;
        if (u.tb->next >= u.tb->resources.size()) return;
        const Slot n = u.tb->resources[u.tb->next].cand.abs_slot;
        if (t != n - cfg.congestion.n_proc_slots(cfg.mu)) return;

        const int window = cfg.congestion.cr_window_slots(cfg.mu);
        const Slot last_selected = u.tb->resources.back().cand.abs_slot;
        const int b = std::min<int>(cfg.congestion.b_split, static_cast<int>(last_selected - n));
        const int a = window - 1 - b;
        const double cbr = u.cbr.value();

        auto projected = [&](const TxKnobs& k) {
            std::vector<int> past;
            for (const auto& [slot, cells] : u.cr_used)
                if (slot >= n - a && slot <= n - 1) past.push_back(cells);
            std::vector<int> future;
            int remaining = k.n_max;  // knob 3 caps how many attempts remain live
            for (size_t i = u.tb->next; i < u.tb->resources.size(); ++i) {
                const Slot s = u.tb->resources[i].cand.abs_slot;
                if (s < n || s > n + b) continue;
                if (static_cast<int>(i) - static_cast<int>(u.tb->next) >= remaining) break;
                future.push_back(u.tb->resources[i].cand.num_subchannels);
            }
            (void)k;
            return sl_cr(past, future, pool.num_subchannels, a, b);
        };

        EnforceLimits lim = cfg.congestion.enforce;
        lim.mcs_count = static_cast<int>(link.spectral_efficiency.size());
        const EnforceAction action =
            enforce(projected, cbr, u.tb->pkt.priority, cfg.congestion.table, u.knobs, lim);
        // Shrinking N releases the tail of this TB's scheduled attempts.
        const int allowed_remaining = std::max(0, u.knobs.n_max - u.tb->attempts);
        if (static_cast<int>(u.tb->resources.size() - u.tb->next) > allowed_remaining) {
            u.tb->resources.resize(u.tb->next + static_cast<size_t>(allowed_remaining));
            u.tb->harq.n_total = u.tb->attempts + allowed_remaining;
        }
        if (u.knobs.drop && u.tb->next < u.tb->resources.size()) {
            u.tb->resources[u.tb->next].congestion_dropped = true;
        }
        u.knobs.drop = false;  // the drop applies to this transmission only
        const double limit = cfg.congestion.table.limit_for(cbr, u.tb->pkt.priority);
        sink.on_cbr({t, u.id, cbr, projected(u.knobs), limit, to_string(action)});
    }

    // Emit the transmission scheduled at slot t, if any.
    std::optional<OnAir> emit_transmission(UeState& u, Slot t, TraceSink& sink) {
        if (!u.tb || u.tb->finished) return std::nullopt;
        if (u.tb->next >= u.tb->resources.size()) return std::nullopt;
        PendingResource& pr = u.tb->resources[u.tb->next];
        if (pr.cand.abs_slot != t) return std::nullopt;
        if (pr.congestion_dropped) {
            u.tb->next += 1;
            congestion_drops += 1;
            sink.on_mac({t, u.id, "drop_congestion", resource_string({pr}), 0, 0,
                         "CR over limit after mitigation"});
            return std::nullopt;
        }

        const Vehicle& v = vehicles[u.id];
        OnAir air;
        air.tx = u.id;
        air.tb_id = u.tb->tb_id;
        air.packet_id = u.tb->pkt.packet_id;
        air.attempt = u.tb->attempts;
        air.res = pr.cand.as_resource();
        air.span = {pr.cand.subchannel * pool.subchannel_prbs,
                    pr.cand.num_subchannels * pool.subchannel_prbs};
        const int m_pssch = air.span.count;
        std::optional<double> pl_dl = cfg.power.use_dl_pathloss ? dl_pathloss(u.id) : std::nullopt;
        std::optional<double> pl_sl;
        if (cfg.power.use_sl_pathloss && u.tb->pkt.cast == CastType::Unicast) {
            auto it = u.reported_rsrp.find(u.tb->pkt.unicast_peer);
            if (it != u.reported_rsrp.end() && it->second.has_value() &&
                u.own_dmrs_psd.has_value())
                pl_sl = sl_pathloss_db(u.own_dmrs_psd.value(), it->second.value());
        }
        air.pssch_power_dbm =
            pssch_power_dbm(cfg.power, cfg.mu, m_pssch, pl_dl, pl_sl) - u.knobs.power_backoff_db;
        air.psd_dbm_per_prb = air.pssch_power_dbm - 10.0 * std::log10(m_pssch);
        u.own_dmrs_psd.update(air.psd_dbm_per_prb);
        air.gen_slot = u.tb->pkt.generation_slot;
        air.pdb_slots = pdb_slots_of(u.tb->pkt);
        air.size_bytes = u.tb->pkt.payload_bytes;
        air.mcs = u.tb->mcs;
        air.pos = v.xy;
        air.antenna_h = v.antenna_height();
        air.feedback_enabled = u.tb->harq.feedback_enabled;

        // 1st-stage SCI: this resource plus the next pending resources of
        // this TB within the 32-slot window, up to max(N_SCI)-1 of them.
        ControlMessage sci;
        sci.source = u.id;
        sci.priority = u.tb->pkt.priority;
        sci.mcs = u.tb->mcs;
        sci.cast = u.tb->pkt.cast;
        sci.harq_option = u.tb->pkt.group.harq_option;
        sci.harq_feedback = u.tb->harq.feedback_enabled;
        sci.tb_id = u.tb->tb_id;
        sci.attempt = u.tb->attempts;
        sci.zone = zone_id(v.xy, cfg.zone_side_m);
        sci.range_m = u.tb->pkt.group.range_m;
        sci.dest = u.tb->pkt.cast == CastType::Unicast ? u.tb->pkt.unicast_peer : 0;
        sci.rri_ms = 0;
        if (u.grant && !u.tb->announce_rri_zero) sci.rri_ms = u.grant->rri_ms;
        sci.resources.push_back(air.res);
        int announced = 0;
        for (size_t i = u.tb->next + 1;
             i < u.tb->resources.size() && announced + 1 < pool.max_n_sci; ++i) {
            if (u.tb->resources[i].cand.abs_slot - t >= 32) break;
            sci.resources.push_back(u.tb->resources[i].cand.as_resource());
            u.tb->resources[i].announced = true;
            ++announced;
        }
        air.sci = sci;

        // Bookkeeping.
        if (u.tb->attempts == 0) {
            PacketRecord& rec = records[record_of_tb.at(u.tb->tb_id)];
            rec.first_tx_slot = t;
            for (size_t i = 0; i < vehicles.size(); ++i) {
                if (i == u.id) continue;
                const double d = (vehicles[i].xy - v.xy).norm();
                if (d > cfg.engine.max_interest_range_m) continue;
                RxOutcome o;
                o.rx = static_cast<UeId>(i);
                o.dist_first_tx_m = d;
                o.intended = u.tb->pkt.cast == CastType::Broadcast ||
                             (u.tb->pkt.cast == CastType::Unicast &&
                              i == u.tb->pkt.unicast_peer) ||
                             (u.tb->pkt.cast == CastType::Groupcast &&
                              std::find(u.tb->pkt.group.members.begin(),
                                        u.tb->pkt.group.members.end(),
                                        i) != u.tb->pkt.group.members.end());
                rec.outcomes.push_back(o);
            }
        }
        u.tb->attempts += 1;
        u.tb->harq.attempts_done = u.tb->attempts;
        u.tb->last_tx_pool_slot = pr.cand.pool_slot;
        u.tb->next += 1;
        u.own_tx.push_back(t);
        tx_attempts += 1;
        sink.on_mac({t, u.id, "tx", resource_string({pr}), sci.rri_ms,
                     u.grant ? u.grant->reselection_counter : 0,
                     "attempt " + std::to_string(u.tb->attempts)});
        return air;
    }

    // ---- reception --------------------------------------------------------

    RxShardResult compute_rx(UeId rx, Slot t, const std::vector<OnAir>& on_air,
                             const std::vector<uint8_t>& transmitted_pssch) {
        RxShardResult out;
        const Vehicle& rv = vehicles[rx];
        const bool rx_muted = transmitted_pssch[rx] != 0;

        // Realize every incoming link once, even when muted, so the per-link
        // channel processes advance identically in both cases.
        struct Incoming {
            const OnAir* air;
            LinkRealization lr;
            double rx_power_dbm;
        };
        std::vector<Incoming> in;
        in.reserve(on_air.size());
        for (const OnAir& air : on_air) {
            if (air.tx == rx) continue;
            LinkRealization lr = link_process(rx, air.tx).realize(chan, geometry(air.tx, rx));
            in.push_back({&air, lr, rx_power_dbm(air.pssch_power_dbm, lr.total_loss_db())});
        }

        // Sub-channel RSSI for the CBR meter.
        if (rx_muted) {
            for (const OnAir& air : on_air)
                if (air.tx == rx) out.busy_subchannels = air.res.num_subchannels;
        } else {
            std::vector<RxContribution> contr;
            for (const Incoming& i : in) contr.push_back({i.air->span, i.rx_power_dbm});
            const double th = cbr_rssi_threshold_dbm(cfg.congestion.rssi_threshold_index);
            for (int sc = 0; sc < pool.num_subchannels; ++sc) {
                PrbSpan span{sc * pool.subchannel_prbs, pool.subchannel_prbs};
                if (rssi_dbm(contr, span, noise, num.scs_khz()) > th) out.busy_subchannels += 1;
            }
        }
        if (rx_muted) return out;

        for (size_t i = 0; i < in.size(); ++i) {
            const OnAir& air = *in[i].air;
            const PacketRecord& rec = records[record_of_tb.at(air.tb_id)];
            const RxOutcome* outcome = nullptr;
            for (const RxOutcome& o : rec.outcomes)
                if (o.rx == rx) outcome = &o;
            std::vector<RxContribution> interferers;
            for (size_t j = 0; j < in.size(); ++j)
                if (j != i) interferers.push_back({in[j].air->span, in[j].rx_power_dbm});
            const double sinr =
                sinr_db({air.span, in[i].rx_power_dbm}, interferers, noise, num.scs_khz());
            const double rsrp = air.psd_dbm_per_prb - in[i].lr.total_loss_db();

            const bool sync_ok =
                !cfg.sync.require_common_reference ||
                ues[rx].sync_root == ues[air.tx].sync_root;
            const bool sci_ok =
                sync_ok && decode(decode_model, DecodeKind::Sci, sinr, air.mcs, &ues[rx].rx_rng);

            bool member = false;
            switch (air.sci.cast) {
                case CastType::Broadcast: member = true; break;
                case CastType::Unicast: member = air.sci.dest == rx; break;
                case CastType::Groupcast: member = outcome && outcome->intended; break;
            }
            const bool tb_ok =
                sci_ok && member &&
                decode(decode_model, DecodeKind::Tb, sinr, air.mcs, &ues[rx].rx_rng);

            // Sensing: store the decoded SCI and its RSRP.
            if (sci_ok) {
                SensedEntry e;
                e.slot = t;
                e.rri_ms = air.sci.rri_ms;
                e.priority = air.sci.priority;
                e.rsrp_dbm = rsrp;
                for (const SlotResource& r : air.sci.resources)
                    e.resources.push_back(
                        {slot_cache.absolute(r.pool_slot), r.subchannel, r.num_subchannels});
                out.new_sensing.push_back(std::move(e));
                out.rsrp_reports.push_back({air.tx, rsrp});
            }

            // HARQ feedback duties.
            if (air.feedback_enabled && member && sci_ok) {
                bool reply = false;
                bool ack = false;
                if (air.sci.cast == CastType::Unicast ||
                    (air.sci.cast == CastType::Groupcast && air.sci.harq_option == 2)) {
                    reply = true;
                    ack = tb_ok;
                } else if (air.sci.cast == CastType::Groupcast && air.sci.harq_option == 1) {
                    reply = option1_should_nack(sci_ok, tb_ok, air.sci.zone, air.sci.range_m,
                                                rv.xy, cfg.zone_side_m);
                    ack = false;
                }
                if (reply) {
                    PendingFeedback fb;
                    fb.psfch_abs_slot = psfch_abs_slot_for(air.res.pool_slot);
                    fb.to = air.tx;
                    fb.from = rx;
                    fb.ack = ack;
                    fb.priority = air.sci.priority;
                    std::uint32_t r_id = 0;
                    if (air.sci.cast == CastType::Groupcast && air.sci.harq_option == 2) {
                        std::uint32_t idx = 0;
                        for (const RxOutcome& o : rec.outcomes) {
                            if (!o.intended) continue;
                            if (o.rx == rx) { r_id = idx; break; }
                            ++idx;
                        }
                    }
                    fb.resource = psfch_resource(air.tx, r_id, air.res, pool, ack);
                    out.new_duties.push_back(fb);
                }
            }

            // Delivery bookkeeping.
            if (tb_ok) {
                const double d = (rv.xy - air.pos).norm();
                out.deliveries.push_back({air.tb_id, t, d,
                                          t <= air.gen_slot + air.pdb_slots});
            }

            // One trace row per attempt for every receiver of interest (the
            // set fixed at the first attempt), so the summary is a pure
            // function of the trace.
            if (outcome != nullptr) {
                RxTraceRow row;
                row.slot = t;
                row.tx = air.tx;
                row.rx = rx;
                row.packet_id = air.packet_id;
                row.attempt = air.attempt;
                row.gen_slot = air.gen_slot;
                row.pdb_slots = air.pdb_slots;
                row.size_bytes = air.size_bytes;
                row.priority = air.sci.priority;
                row.pool_slot = air.res.pool_slot;
                row.subchannel = air.res.subchannel;
                row.l_pssch = air.res.num_subchannels;
                row.mcs = air.mcs;
                row.tx_power_dbm = air.pssch_power_dbm;
                row.rsrp_dbm = rsrp;
                row.sinr_db = sinr;
                row.sci_decoded = sci_ok;
                row.tb_decoded = tb_ok;
                row.distance_m = (rv.xy - air.pos).norm();
                row.dist_first_tx_m = outcome->dist_first_tx_m;
                row.link_state = in[i].lr.state == LinkState::Los    ? 0
                                 : in[i].lr.state == LinkState::Nlos ? 1
                                                                     : 2;
                row.total_loss_db = in[i].lr.total_loss_db();
                out.rows.push_back(row);
            }
        }
        return out;
    }

    Slot psfch_abs_slot_for(Slot pssch_pool_slot) {
        if (!pool.psfch.enabled()) return -1;
        return slot_cache.absolute(psfch_slot_for(pssch_pool_slot, pool));
    }

    // ---- PSFCH occasion ---------------------------------------------------

    void psfch_phase(Slot t, const std::vector<uint8_t>& transmitted_pssch, TraceSink& sink) {
        if (!pool.psfch.enabled()) return;
        const auto ord = slot_cache.ordinal(t);
        if (!ord || !is_psfch_bearer(*ord, pool)) return;

        // Expectations: UEs whose pending feedback occasion is this slot.
        std::vector<std::vector<PendingFeedback>> tx_duties(ues.size());
        auto it = feedback_by_slot.find(t);
        if (it != feedback_by_slot.end()) {
            for (const PendingFeedback& fb : it->second)
                tx_duties[fb.from].push_back(fb);
        }
        std::vector<std::vector<PsfchDuty>> rx_expect(ues.size());
        for (UeState& u : ues) {
            if (!u.tb || u.tb->finished || !u.tb->harq.feedback_enabled) continue;
            if (!u.tb->last_tx_pool_slot) continue;
            if (psfch_abs_slot_for(*u.tb->last_tx_pool_slot) == t)
                rx_expect[u.id].push_back({u.tb->pkt.priority, u.tb->tb_id});
        }

        // Half-duplex arbitration per UE.
        std::vector<uint8_t> duty_sent(ues.size(), 0);
        std::vector<uint8_t> may_listen(ues.size(), 0);
        std::vector<std::vector<PendingFeedback>> sent(ues.size());
        for (size_t ue = 0; ue < ues.size(); ++ue) {
            SlotIntents intents;
            intents.pssch_tx = transmitted_pssch[ue] != 0;
            for (const PendingFeedback& fb : tx_duties[ue])
                intents.psfch_tx.push_back({fb.priority, fb.to});
            intents.psfch_rx = rx_expect[ue];
            const AllowedActions act =
                half_duplex_filter(intents, cfg.radio.max_simultaneous_psfch);
            may_listen[ue] = act.psfch_rx_allowed ? 1 : 0;
            for (size_t k : act.psfch_tx_selected) sent[ue].push_back(tx_duties[ue][k]);
            duty_sent[ue] = sent[ue].empty() ? 0 : 1;
        }

        // Deliver feedback to listeners and run the HARQ step for every UE
        // whose feedback occasion is this slot.
        for (UeState& u : ues) {
            if (rx_expect[u.id].empty()) continue;
            std::vector<HarqFeedbackEvent> events;
            if (may_listen[u.id]) {
                for (size_t s = 0; s < ues.size(); ++s)
                    for (const PendingFeedback& fb : sent[s])
                        if (fb.to == u.id) events.push_back({fb.from, fb.ack});
            }
            std::sort(events.begin(), events.end(),
                      [](const HarqFeedbackEvent& a, const HarqFeedbackEvent& b) {
                          return a.from < b.from;
                      });
            const HarqDecision d = harq_step(u.tb->harq, events);
            if (d == HarqDecision::Done || d == HarqDecision::Drop) {
                const size_t released = u.tb->resources.size() - u.tb->next;
                u.tb->resources.resize(u.tb->next);
                u.tb->finished = true;
                sink.on_mac({t, u.id, d == HarqDecision::Done ? "harq_done" : "harq_drop",
                             "", 0, 0,
                             released > 0 ? std::to_string(released) + " reserved released"
                                          : ""});
            }
        }
        feedback_by_slot.erase(t);
    }

    // ---- sync -------------------------------------------------------------

    void sync_phase(Slot t, TraceSink& sink) {
        if (cfg.sync.mode == SyncMode::Disabled) return;
        const Slot period = num.ms_to_slots(kSssbPeriodMs);
        if (t % period != 0) return;

        struct Announced {
            UeId ue;
            SlssIdentity slss;
            std::uint64_t root;
            double power_dbm;
            bool was_syncref;
        };
        std::vector<Announced> beacons;
        for (UeState& u : ues) {
            if (!u.is_syncref) continue;
            const bool cov = in_coverage(u.id);
            const double p = sssb_power_dbm(cfg.power, cfg.mu, dl_pathloss(u.id), cov);
            beacons.push_back({u.id, u.slss, u.sync_root, p, true});
        }

        const double noise_11prb = noise.noise_dbm(11, num.scs_khz());
        for (UeState& u : ues) {
            std::vector<SyncCandidate> cands;
            std::optional<double> selected_rsrp;
            if (cfg.sync.mode == SyncMode::GnssBased) {
                cands.push_back({SyncRefKind::Gnss, 0, 0, true, 0.0});
            }
            if (in_coverage(u.id)) {
                const double rsrp = cfg.gnb.tx_power_dbm - *dl_pathloss(u.id);
                cands.push_back({SyncRefKind::Gnb, 0, 0, true, rsrp});
            }
            for (const Announced& b : beacons) {
                if (b.ue == u.id) continue;
                LinkRealization lr =
                    link_process(u.id, b.ue).realize(chan, geometry(b.ue, u.id));
                const double rsrp = b.power_dbm - lr.total_loss_db();
                const double sinr = rsrp - noise_11prb;
                if (sinr < cfg.sync.sssb_decode_threshold_db) continue;
                cands.push_back({SyncRefKind::SyncRefUe, b.ue, b.slss.slss_id, b.slss.i_ic, rsrp});
            }
            const SyncSelection sel =
                select_reference(cands, cfg.sync.syncref_rsrp_threshold_dbm, cfg.sync.mode,
                                 cfg.sync.disable_levels_4_to_6);
            u.sync_sel = sel;

            // Chain root for the common-timing decode gate.
            switch (sel.kind) {
                case SyncRefKind::Gnss: u.sync_root = 1; break;
                case SyncRefKind::Gnb: u.sync_root = 2; break;
                case SyncRefKind::SyncRefUe: {
                    for (const Announced& b : beacons)
                        if (b.ue == sel.ref_ue) u.sync_root = b.root;
                    break;
                }
                case SyncRefKind::InternalClock: u.sync_root = 1000000 + u.id; break;
            }

            const bool internal = sel.kind == SyncRefKind::InternalClock;
            if (sel.kind == SyncRefKind::SyncRefUe || sel.kind == SyncRefKind::Gnb)
                selected_rsrp = sel.rsrp_dbm;
            const bool has_data = !u.queue.empty() || u.tb.has_value();
            std::optional<bool> net_cfg;
            if (in_coverage(u.id)) net_cfg = cfg.sync.network_configured_tx;
            const bool tx_sssb =
                should_transmit_sssb(net_cfg, has_data, selected_rsrp,
                                     cfg.sync.sssb_trigger_threshold_dbm, internal);
            u.is_syncref = tx_sssb;
            if (tx_sssb) {
                const int assigned = 1 + static_cast<int>(u.id % 335);
                u.slss = derive_slss_id(sel.kind, sel.ref_slss_id, sel.ref_i_ic, assigned,
                                        u.mac_rng);
            }
            const char* ref = sel.kind == SyncRefKind::Gnss        ? "gnss"
                              : sel.kind == SyncRefKind::Gnb       ? "gnb"
                              : sel.kind == SyncRefKind::SyncRefUe ? "syncref"
                                                                   : "internal";
            sink.on_sync({t, u.id, ref, sel.level, tx_sssb ? u.slss.slss_id : -1});
        }
    }

    // ---- main loop --------------------------------------------------------

    RunResult run(TraceSink& sink) {
        const Slot t0_slots = num.ms_to_slots(pool.t0_ms);
        for (Slot t = 0; t < total_slots; ++t) {
            advance_mobility(vehicles, layout, cfg.dropping.option, slot_s, mobility_rng);
            for (UeState& u : ues) generate_traffic(u, t);
            sync_phase(t, sink);

            // MAC decisions (two-phase: transmissions decided before any
            // reception of this slot is evaluated).
            std::vector<OnAir> on_air;
            std::vector<uint8_t> transmitted(ues.size(), 0);
            for (UeState& u : ues) {
                // Prune sensing memory to the sensing window (entries are
                // appended in slot order).
                const Slot horizon = t - t0_slots;
                while (!u.sensing.empty() && u.sensing.front().slot < horizon)
                    u.sensing.pop_front();
                while (!u.own_tx.empty() && u.own_tx.front() < horizon) u.own_tx.pop_front();

                expire_and_finalize(u, t, sink);
                if (!u.tb && !u.queue.empty()) start_tb(u, t, sink);
                if (cfg.mode2.reevaluation != ReevaluationPolicy::Disabled)
                    recheck_resources(u, t, sink);
                congestion_check(u, t, sink);
                if (auto air = emit_transmission(u, t, sink)) {
                    transmitted[u.id] = 1;
                    on_air.push_back(std::move(*air));
                }
            }

            // Reception, parallel over receivers with a deterministic merge.
            std::vector<RxShardResult> results(ues.size());
            auto work = [&](size_t rx) { results[rx] = compute_rx(static_cast<UeId>(rx), t,
                                                                  on_air, transmitted); };
            if (cfg.engine.threads > 1 && !on_air.empty()) {
                std::atomic<size_t> next{0};
                std::vector<std::thread> pool_threads;
                const int nt = std::min<int>(cfg.engine.threads,
                                             static_cast<int>(ues.size()));
                for (int i = 0; i < nt; ++i)
                    pool_threads.emplace_back([&] {
                        for (;;) {
                            const size_t rx = next.fetch_add(1);
                            if (rx >= ues.size()) return;
                            work(rx);
                        }
                    });
                for (auto& th : pool_threads) th.join();
            } else {
                for (size_t rx = 0; rx < ues.size(); ++rx) work(rx);
            }

            // Deterministic merge in rx order.
            for (size_t rx = 0; rx < ues.size(); ++rx) {
                RxShardResult& r = results[rx];
                for (const RxTraceRow& row : r.rows) {
                    sink.on_rx(row);
                    receptions_traced += 1;
                }
                auto& u = ues[rx];
                for (SensedEntry& e : r.new_sensing) u.sensing.push_back(std::move(e));
                for (const PendingFeedback& fb : r.new_duties)
                    feedback_by_slot[fb.psfch_abs_slot].push_back(fb);
                for (const auto& [tx, rsrp] : r.rsrp_reports)
                    ues[tx].reported_rsrp[static_cast<UeId>(rx)].update(rsrp);
                for (const auto& d : r.deliveries) {
                    PacketRecord& rec = records[record_of_tb.at(d.tb_id)];
                    for (RxOutcome& o : rec.outcomes) {
                        if (o.rx != rx) continue;
                        if (o.delivered || o.late) continue;  // first decode only
                        o.delivered_slot = d.slot;
                        o.dist_delivery_m = d.dist;
                        if (d.within_pdb) o.delivered = true;
                        else o.late = true;
                    }
                }
                u.cbr.push_slot(r.busy_subchannels);
                u.cr_used.push_back({t, transmitted[rx] ? r.busy_subchannels : 0});
                const int cr_window = cfg.congestion.cr_window_slots(cfg.mu);
                while (static_cast<int>(u.cr_used.size()) > cr_window) u.cr_used.pop_front();
            }

            psfch_phase(t, transmitted, sink);

            // Periodic CBR/CR samples.
            if (cfg.engine.cbr_sample_period_slots > 0 &&
                t % cfg.engine.cbr_sample_period_slots == 0) {
                for (UeState& u : ues) {
                    const double cr = current_cr(u, t);
                    if (t >= warmup_slots) cbr_cr_samples.push_back({u.cbr.value(), cr});
                    sink.on_cbr({t, u.id, u.cbr.value(), cr, 1.0, "sample"});
                }
            }
        }

        // Final bookkeeping and summary.
        RunResult out;
        out.slots_simulated = total_slots;
        std::vector<PacketRecord> kept;
        for (PacketRecord& r : records)
            if (r.generation_slot >= warmup_slots) kept.push_back(std::move(r));
        out.records = std::move(kept);
        out.cbr_cr_samples = cbr_cr_samples;
        MetricsInputs mi;
        mi.pir_distances_m = cfg.metrics.pir_distances_m;
        mi.prr_baseline_m = cfg.prr_baseline_m();
        mi.slot_duration_s = slot_s;
        out.summary = summarize(out.records, out.cbr_cr_samples, mi);
        out.summary.tx_attempts = tx_attempts;
        out.summary.receptions_traced = receptions_traced;
        out.summary.congestion_drops = congestion_drops;
        out.summary.pdb_drops = pdb_drops;
        out.summary.reselections = reselections;
        out.summary.reevaluation_replacements = reeval_replacements;
        out.summary.preemption_releases = preempt_releases;
        return out;
    }

    double current_cr(UeState& u, Slot t) {
        const int window = cfg.congestion.cr_window_slots(cfg.mu);
        const int a = window - 1;
        std::vector<int> past;
        for (const auto& [slot, cells] : u.cr_used)
            if (slot >= t - a && slot <= t - 1) past.push_back(cells);
        return sl_cr(past, {}, pool.num_subchannels, a, 0);
    }

    // Drops expired queue entries / TBs; closes out finished TB cycles.
    void expire_and_finalize(UeState& u, Slot t, TraceSink& sink) {
        while (!u.queue.empty() &&
               u.queue.front().generation_slot + pdb_slots_of(u.queue.front()) <= t) {
            pdb_drops += 1;
            sink.on_mac({t, u.id, "drop_pdb", "", 0, 0, "PDB expired in queue"});
            u.queue.pop_front();
        }
        if (!u.tb) return;
        ActiveTb& tb = *u.tb;
        const bool exhausted = tb.next >= tb.resources.size();
        const bool expired = t > tb.deadline;
        if (tb.finished || expired || (exhausted && !tb.harq.feedback_enabled)) {
            if (expired && !tb.finished && !exhausted) {
                sink.on_mac({t, u.id, "drop_pdb", resource_string(tb.resources), 0, 0,
                             "PDB expired mid-TB"});
                pdb_drops += 1;
            }
            finish_cycle(u, t, sink);
            return;
        }
        // Feedback-enabled TB with every resource used: wait for the last
        // PSFCH occasion before closing the cycle.
        if (exhausted) {
            if (!tb.last_tx_pool_slot ||
                t > psfch_abs_slot_for(*tb.last_tx_pool_slot))
                finish_cycle(u, t, sink);
        }
    }

    void finish_cycle(UeState& u, Slot t, TraceSink& sink) {
        u.tb.reset();
        if (!u.grant) return;
        if (u.final_cycle_decision) {
            // Counter hit zero this cycle; the decision was drawn up front.
            if (*u.final_cycle_decision == CycleEnd::Reselect) {
                u.grant.reset();
                sink.on_mac({t, u.id, "reselect_scheduled", "", 0, 0, "counter expired"});
            }
            u.final_cycle_decision.reset();
            return;
        }
        const CycleEnd ce = on_tb_cycle_end(*u.grant, u.mac_rng);
        if (ce == CycleEnd::Reselect) {
            u.grant.reset();
            sink.on_mac({t, u.id, "reselect_scheduled", "", 0, 0, "counter expired"});
        }
    }
};

SimEngine::SimEngine(SimConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
SimEngine::~SimEngine() = default;

RunResult SimEngine::run(TraceSink& sink) { return impl_->run(sink); }

const std::vector<Vehicle>& SimEngine::vehicles() const { return impl_->vehicles; }

int run_and_emit(const SimConfig& cfg, const std::string& out_dir) {
    try {
        std::filesystem::create_directories(out_dir);
        CsvTraceWriter writer(out_dir + "/trace.csv", out_dir + "/cbr_timeseries.csv");
        SimEngine engine(cfg);
        RunResult result = engine.run(writer);
        std::ofstream summary(out_dir + "/summary.json");
        if (!summary) {
            std::cerr << "cannot write " << out_dir << "/summary.json\n";
            return 1;
        }
        summary << summary_to_json(result.summary, config_to_json(cfg), cfg.seed) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace nrv2x
