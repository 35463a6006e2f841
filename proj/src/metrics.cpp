#include "nrv2x/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace nrv2x {

std::array<PrrBin, kPrrBinCount> prr_type1_bins(const std::vector<PacketRecord>& records) {
    std::array<PrrBin, kPrrBinCount> bins{};
    for (const PacketRecord& r : records) {
        if (r.first_tx_slot < 0) continue;
        for (const RxOutcome& o : r.outcomes) {
            const int bin = static_cast<int>(std::floor(o.dist_first_tx_m / kPrrBinWidthM));
            if (bin < 0 || bin >= kPrrBinCount) continue;
            if (o.dist_first_tx_m <= 0.0) continue;  // bins are (a, b]
            bins[static_cast<size_t>(bin)].receivers += 1;
            if (o.delivered) bins[static_cast<size_t>(bin)].successes += 1;
        }
    }
    return bins;
}

PrrAggregate prr_type1_range(const std::vector<PacketRecord>& records, double range_m) {
    PrrAggregate agg;
    for (const PacketRecord& r : records) {
        if (r.first_tx_slot < 0) continue;
        long x = 0, y = 0;
        for (const RxOutcome& o : r.outcomes) {
            if (o.dist_first_tx_m <= 0.0 || o.dist_first_tx_m > range_m) continue;
            y += 1;
            if (o.delivered) x += 1;
        }
        if (y == 0) continue;
        agg.per_packet.push_back(static_cast<double>(x) / static_cast<double>(y));
        agg.total.successes += x;
        agg.total.receivers += y;
    }
    return agg;
}

PrrAggregate prr_type2(const std::vector<PacketRecord>& records) {
    PrrAggregate agg;
    for (const PacketRecord& r : records) {
        if (r.first_tx_slot < 0) continue;
        long s = 0, z = 0;
        for (const RxOutcome& o : r.outcomes) {
            if (!o.intended) continue;
            z += 1;
            if (o.delivered) s += 1;
        }
        if (z == 0) continue;
        agg.per_packet.push_back(static_cast<double>(s) / static_cast<double>(z));
        agg.total.successes += s;
        agg.total.receivers += z;
    }
    return agg;
}

PirResult pir(const std::vector<PacketRecord>& records, int type, double distance_m,
              double slot_duration_s) {
    // Success events per (tx, rx): (delivery slot, packet id, distance at delivery).
    struct Event {
        Slot slot;
        std::uint64_t packet;
        double dist;
    };
    std::map<std::pair<UeId, UeId>, std::vector<Event>> events;
    for (const PacketRecord& r : records) {
        for (const RxOutcome& o : r.outcomes) {
            if (!o.delivered) continue;
            if (type == 1) {
                if (o.dist_delivery_m <= 0.0 || o.dist_delivery_m > distance_m) continue;
            } else {
                if (!o.intended) continue;
            }
            events[{r.tx, o.rx}].push_back({o.delivered_slot, r.packet_id, o.dist_delivery_m});
        }
    }
    PirResult out;
    for (auto& [key, evs] : events) {
        std::sort(evs.begin(), evs.end(), [](const Event& a, const Event& b) {
            return a.slot < b.slot || (a.slot == b.slot && a.packet < b.packet);
        });
        for (size_t i = 1; i < evs.size(); ++i) {
            if (evs[i].packet == evs[i - 1].packet) continue;  // two different packets required
            out.intervals_s.push_back(static_cast<double>(evs[i].slot - evs[i - 1].slot) *
                                      slot_duration_s);
        }
    }
    if (!out.intervals_s.empty()) {
        double sum = 0.0;
        for (double v : out.intervals_s) sum += v;
        out.mean_s = sum / static_cast<double>(out.intervals_s.size());
    }
    return out;
}

ThroughputResult throughput(const std::vector<PacketRecord>& records, double slot_duration_s) {
    ThroughputResult out;
    std::map<UeId, std::pair<double, long>> per_flow;  // sum, count
    double total = 0.0;
    for (const PacketRecord& r : records) {
        for (const RxOutcome& o : r.outcomes) {
            if (!o.delivered) continue;
            const Slot dt = std::max<Slot>(1, o.delivered_slot - r.generation_slot);
            const double bps =
                static_cast<double>(r.size_bytes) * 8.0 / (static_cast<double>(dt) * slot_duration_s);
            per_flow[r.tx].first += bps;
            per_flow[r.tx].second += 1;
            total += bps;
            out.delivered += 1;
        }
    }
    for (const auto& [flow, acc] : per_flow)
        out.mean_bps_per_flow[flow] = acc.first / static_cast<double>(acc.second);
    if (out.delivered > 0) out.mean_bps = total / static_cast<double>(out.delivered);
    return out;
}

Deciles deciles(std::vector<double> values) {
    Deciles d;
    d.count = static_cast<long>(values.size());
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    d.q[0] = values.front();
    d.q[10] = values.back();
    for (int i = 1; i <= 9; ++i) {
        const double pos = 0.1 * i * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<size_t>(std::floor(pos));
        const auto hi = static_cast<size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        d.q[static_cast<size_t>(i)] = values[lo] * (1.0 - frac) + values[hi] * frac;
    }
    return d;
}

MetricsSummary summarize(const std::vector<PacketRecord>& records,
                         const std::vector<std::pair<double, double>>& cbr_cr_samples,
                         const MetricsInputs& inputs) {
    MetricsSummary s;
    s.packets_generated = static_cast<long>(records.size());
    for (const PacketRecord& r : records)
        if (r.first_tx_slot >= 0) s.packets_transmitted += 1;

    s.prr_bins = prr_type1_bins(records);
    s.prr_baseline_m = inputs.prr_baseline_m;
    PrrAggregate base = prr_type1_range(records, inputs.prr_baseline_m);
    s.prr_baseline_total = base.total;
    s.prr_baseline_cdf.assign(101, 0.0);
    if (!base.per_packet.empty()) {
        for (double v : base.per_packet) {
            const int k = static_cast<int>(std::ceil(v * 100.0 - 1e-9));
            for (int i = std::clamp(k, 0, 100); i <= 100; ++i)
                s.prr_baseline_cdf[static_cast<size_t>(i)] += 1.0;
        }
        for (double& v : s.prr_baseline_cdf) v /= static_cast<double>(base.per_packet.size());
    }
    s.prr_type2_total = prr_type2(records).total;

    for (double d : inputs.pir_distances_m) {
        PirResult p = pir(records, 1, d, inputs.slot_duration_s);
        s.pir_type1_s[d] = deciles(p.intervals_s);
        s.pir_type1_mean_s[d] = p.mean_s;
    }
    PirResult p2 = pir(records, 2, 0.0, inputs.slot_duration_s);
    s.pir_type2_s = deciles(p2.intervals_s);
    s.pir_type2_mean_s = p2.mean_s;

    ThroughputResult tp = throughput(records, inputs.slot_duration_s);
    s.throughput_mean_bps = tp.mean_bps;
    s.throughput_delivered = tp.delivered;

    double cbr_sum = 0.0, cr_sum = 0.0;
    for (const auto& [cbr, cr] : cbr_cr_samples) {
        cbr_sum += cbr;
        cr_sum += cr;
    }
    s.cbr_samples = static_cast<long>(cbr_cr_samples.size());
    if (s.cbr_samples > 0) {
        s.mean_cbr = cbr_sum / static_cast<double>(s.cbr_samples);
        s.mean_cr = cr_sum / static_cast<double>(s.cbr_samples);
    }
    return s;
}

std::string summary_to_json(const MetricsSummary& s, const std::string& config_echo_json,
                            std::uint64_t seed) {
    nlohmann::json j;
    j["seed"] = seed;
    j["packets"] = {{"generated", s.packets_generated},
                    {"transmitted", s.packets_transmitted},
                    {"tx_attempts", s.tx_attempts},
                    {"receptions_traced", s.receptions_traced},
                    {"congestion_drops", s.congestion_drops},
                    {"pdb_drops", s.pdb_drops},
                    {"reselections", s.reselections},
                    {"reevaluation_replacements", s.reevaluation_replacements},
                    {"preemption_releases", s.preemption_releases}};
    nlohmann::json bins = nlohmann::json::array();
    for (int i = 0; i < kPrrBinCount; ++i) {
        const PrrBin& b = s.prr_bins[static_cast<size_t>(i)];
        nlohmann::json e = {{"from_m", i * kPrrBinWidthM},
                            {"to_m", (i + 1) * kPrrBinWidthM},
                            {"successes", b.successes},
                            {"receivers", b.receivers}};
        if (auto r = b.ratio()) e["prr"] = *r;
        bins.push_back(e);
    }
    j["prr_type1_bins"] = bins;
    nlohmann::json base = {{"range_m", s.prr_baseline_m},
                           {"successes", s.prr_baseline_total.successes},
                           {"receivers", s.prr_baseline_total.receivers},
                           {"cdf", s.prr_baseline_cdf}};
    if (auto r = s.prr_baseline_total.ratio()) base["prr"] = *r;
    j["prr_type1_baseline"] = base;
    nlohmann::json t2 = {{"successes", s.prr_type2_total.successes},
                         {"receivers", s.prr_type2_total.receivers}};
    if (auto r = s.prr_type2_total.ratio()) t2["prr"] = *r;
    j["prr_type2"] = t2;
    nlohmann::json pir1 = nlohmann::json::array();
    for (const auto& [d, dec] : s.pir_type1_s) {
        pir1.push_back({{"distance_m", d},
                        {"mean_s", s.pir_type1_mean_s.at(d)},
                        {"count", dec.count},
                        {"deciles_s", dec.q}});
    }
    j["pir_type1"] = pir1;
    j["pir_type2"] = {{"mean_s", s.pir_type2_mean_s},
                      {"count", s.pir_type2_s.count},
                      {"deciles_s", s.pir_type2_s.q}};
    j["throughput"] = {{"mean_bps", s.throughput_mean_bps}, {"delivered", s.throughput_delivered}};
    j["congestion"] = {{"mean_cbr", s.mean_cbr}, {"mean_cr", s.mean_cr}, {"samples", s.cbr_samples}};
    j["config"] = nlohmann::json::parse(config_echo_json);
    return j.dump(2);
}

}  // namespace nrv2x
