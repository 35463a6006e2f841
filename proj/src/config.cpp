#include "nrv2x/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nrv2x {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

template <typename T>
T get_or(const json& j, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(key, std::string("bad value (") + e.what() + ")");
    }
}

std::vector<uint8_t> parse_bitmap(const json& j, const std::string& path) {
    std::vector<uint8_t> out;
    if (j.is_string()) {
        for (char c : j.get<std::string>()) {
            if (c != '0' && c != '1') fail(path, "bitmap strings may contain only 0/1");
            out.push_back(c == '1' ? 1 : 0);
        }
    } else if (j.is_number_integer()) {
        const int len = j.get<int>();
        out.assign(static_cast<size_t>(std::max(len, 0)), 1);
    } else if (j.is_array()) {
        for (const auto& v : j) out.push_back(v.get<int>() ? 1 : 0);
    } else {
        fail(path, "expected a 0/1 string, an all-ones length, or an array");
    }
    return out;
}

std::string bitmap_to_string(const std::vector<uint8_t>& bm) {
    std::string s;
    s.reserve(bm.size());
    for (uint8_t b : bm) s.push_back(b ? '1' : '0');
    return s;
}

std::vector<std::vector<double>> parse_8x8(const json& j, const std::string& path) {
    std::vector<std::vector<double>> t;
    if (j.is_number()) {
        t.assign(8, std::vector<double>(8, j.get<double>()));
        return t;
    }
    if (!j.is_array() || j.size() != 8) fail(path, "expected a scalar or an 8x8 table");
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 8) fail(path, "expected 8 columns per row");
        t.push_back(row.get<std::vector<double>>());
    }
    return t;
}

std::vector<int> parse_per_priority(const json& j, const std::string& path) {
    if (j.is_number_integer()) return std::vector<int>(8, j.get<int>());
    if (!j.is_array() || j.size() != 8) fail(path, "expected a scalar or 8 per-priority values");
    return j.get<std::vector<int>>();
}

void parse_pool(const json& j, ResourcePool& p) {
    p.num_subchannels = get_or(j, "subchannels", p.num_subchannels);
    p.subchannel_prbs = get_or(j, "subchannel_prbs", p.subchannel_prbs);
    if (j.contains("slot_bitmap")) p.slot_bitmap = parse_bitmap(j.at("slot_bitmap"), "pool.slot_bitmap");
    if (j.contains("sl_symbols")) {
        const auto& s = j.at("sl_symbols");
        p.sl_symbol_start = get_or(s, "start", p.sl_symbol_start);
        p.sl_symbol_count = get_or(s, "count", p.sl_symbol_count);
    }
    if (j.contains("pscch")) {
        const auto& s = j.at("pscch");
        p.pscch.symbols = get_or(s, "symbols", p.pscch.symbols);
        p.pscch.prbs = get_or(s, "prbs", p.pscch.prbs);
    }
    if (j.contains("psfch")) {
        const auto& s = j.at("psfch");
        p.psfch.period = get_or(s, "period", p.psfch.period);
        p.psfch.min_gap = get_or(s, "min_gap", p.psfch.min_gap);
        p.psfch.bearer_offset = get_or(s, "bearer_offset", p.psfch.bearer_offset);
        p.psfch.cs_pairs = get_or(s, "cs_pairs", p.psfch.cs_pairs);
        if (s.contains("prb_bitmap"))
            p.psfch.prb_bitmap = parse_bitmap(s.at("prb_bitmap"), "pool.psfch.prb_bitmap");
        const std::string opt = get_or<std::string>(s, "option", "pssch_subchannels");
        if (opt == "pssch_subchannels") p.psfch.option = PsfchOption::PssschSubchannels;
        else if (opt == "starting_subchannel") p.psfch.option = PsfchOption::StartingSubchannel;
        else fail("pool.psfch.option", "allowed {pssch_subchannels,starting_subchannel}, given " + opt);
    }
    p.rri_list_ms = get_or(j, "rri_list_ms", p.rri_list_ms);
    if (j.contains("rsrp_threshold_dbm"))
        p.rsrp_threshold_dbm = parse_8x8(j.at("rsrp_threshold_dbm"), "pool.rsrp_threshold_dbm");
    if (j.contains("x_percent"))
        p.x_percent_by_priority = parse_per_priority(j.at("x_percent"), "pool.x_percent");
    p.n_max = get_or(j, "n_max", p.n_max);
    p.max_n_sci = get_or(j, "max_n_sci", p.max_n_sci);
    p.t_gap_slots = get_or(j, "t_gap_slots", p.t_gap_slots);
    p.sps_enabled = get_or(j, "sps_enabled", p.sps_enabled);
    if (j.contains("preemption")) {
        const auto& s = j.at("preemption");
        p.preemption_enabled = get_or(s, "enabled", p.preemption_enabled);
        p.preemption_priority_threshold =
            get_or(s, "priority_threshold", p.preemption_priority_threshold);
    }
    p.t0_ms = get_or(j, "t0_ms", p.t0_ms);
}

json pool_to_json(const ResourcePool& p) {
    json j;
    j["subchannels"] = p.num_subchannels;
    j["subchannel_prbs"] = p.subchannel_prbs;
    j["slot_bitmap"] = bitmap_to_string(p.slot_bitmap);
    j["sl_symbols"] = {{"start", p.sl_symbol_start}, {"count", p.sl_symbol_count}};
    j["pscch"] = {{"symbols", p.pscch.symbols}, {"prbs", p.pscch.prbs}};
    j["psfch"] = {{"period", p.psfch.period},
                  {"min_gap", p.psfch.min_gap},
                  {"bearer_offset", p.psfch.bearer_offset},
                  {"cs_pairs", p.psfch.cs_pairs},
                  {"prb_bitmap", bitmap_to_string(p.psfch.prb_bitmap)},
                  {"option", p.psfch.option == PsfchOption::PssschSubchannels
                                 ? "pssch_subchannels"
                                 : "starting_subchannel"}};
    j["rri_list_ms"] = p.rri_list_ms;
    j["rsrp_threshold_dbm"] = p.rsrp_threshold_dbm;
    j["x_percent"] = p.x_percent_by_priority;
    j["n_max"] = p.n_max;
    j["max_n_sci"] = p.max_n_sci;
    j["t_gap_slots"] = p.t_gap_slots;
    j["sps_enabled"] = p.sps_enabled;
    j["preemption"] = {{"enabled", p.preemption_enabled},
                       {"priority_threshold", p.preemption_priority_threshold}};
    j["t0_ms"] = p.t0_ms;
    return j;
}

SimConfig parse_config(const json& j) {
    SimConfig c = default_config();

    if (j.contains("scenario")) {
        const auto& s = j.at("scenario");
        const std::string kind = get_or<std::string>(s, "kind", "highway");
        if (kind == "highway") c.layout.kind = RoadLayout::Kind::Highway;
        else if (kind == "urban_grid") c.layout.kind = RoadLayout::Kind::UrbanGrid;
        else fail("scenario.kind", "allowed {highway,urban_grid}, given " + kind);
        c.layout.highway_length_m = get_or(s, "length_m", c.layout.highway_length_m);
        c.layout.highway_lane_width_m = get_or(s, "lane_width_m", c.layout.highway_lane_width_m);
        c.layout.blocks_x = get_or(s, "blocks_x", c.layout.blocks_x);
        c.layout.blocks_y = get_or(s, "blocks_y", c.layout.blocks_y);
        c.layout.block_dx_m = get_or(s, "block_dx_m", c.layout.block_dx_m);
        c.layout.block_dy_m = get_or(s, "block_dy_m", c.layout.block_dy_m);
        c.layout.urban_lane_width_m = get_or(s, "urban_lane_width_m", c.layout.urban_lane_width_m);
    }
    if (j.contains("dropping")) {
        const auto& s = j.at("dropping");
        const std::string opt = get_or<std::string>(s, "option", "A");
        if (opt == "A") c.dropping.option = DropOption::A;
        else if (opt == "B") c.dropping.option = DropOption::B;
        else if (opt == "C") c.dropping.option = DropOption::C;
        else fail("dropping.option", "allowed {A,B,C}, given " + opt);
        c.dropping.highway_low_speed = get_or(s, "highway_low_speed", false);
        c.dropping.max_vehicles = get_or(s, "max_vehicles", 0);
        c.dropping.min_gap_m = get_or(s, "min_gap_m", 2.0);
    }
    if (j.contains("numerology")) {
        const auto& s = j.at("numerology");
        c.mu = get_or(s, "mu", c.mu);
        const std::string cp = get_or<std::string>(s, "cp", "normal");
        if (cp == "normal") c.cp = CyclicPrefix::Normal;
        else if (cp == "extended") c.cp = CyclicPrefix::Extended;
        else fail("numerology.cp", "allowed {normal,extended}, given " + cp);
        if (s.contains("scs_khz") && s.at("scs_khz").get<int>() != (15 << c.mu))
            fail("numerology.scs_khz", "inconsistent with mu=" + std::to_string(c.mu) +
                                           " (expected " + std::to_string(15 << c.mu) + ")");
    }
    c.carrier_ghz = get_or(j, "carrier_ghz", c.carrier_ghz);
    if (j.contains("pool")) parse_pool(j.at("pool"), c.pool);

    if (j.contains("traffic")) {
        const auto& s = j.at("traffic");
        c.traffic.model = traffic_model_from_string(get_or<std::string>(s, "model", "P1"));
        c.traffic.priority = get_or(s, "priority", c.traffic.priority);
        const std::string cast = get_or<std::string>(s, "cast", "broadcast");
        if (cast == "broadcast") c.traffic.cast = CastType::Broadcast;
        else if (cast == "groupcast") c.traffic.cast = CastType::Groupcast;
        else if (cast == "unicast") c.traffic.cast = CastType::Unicast;
        else fail("traffic.cast", "allowed {broadcast,groupcast,unicast}, given " + cast);
        if (s.contains("groupcast")) {
            const auto& g = s.at("groupcast");
            c.traffic.groupcast_option = get_or(g, "option", c.traffic.groupcast_option);
            c.traffic.groupcast_k_nearest = get_or(g, "k_nearest", c.traffic.groupcast_k_nearest);
            c.traffic.groupcast_range_m = get_or(g, "range_m", c.traffic.groupcast_range_m);
        }
        c.traffic.harq_feedback = get_or(s, "harq_feedback", c.traffic.harq_feedback);
    }
    if (j.contains("mode2")) {
        const auto& s = j.at("mode2");
        c.mode2.keep_probability = get_or(s, "keep_probability", c.mode2.keep_probability);
        c.mode2.num_transmissions = get_or(s, "num_transmissions", c.mode2.num_transmissions);
        if (s.contains("t2_ms") && !s.at("t2_ms").is_null())
            c.mode2.t2_ms = s.at("t2_ms").get<int>();
        if (s.contains("t2min_ms"))
            c.mode2.t2min_ms = parse_per_priority(s.at("t2min_ms"), "mode2.t2min_ms");
        const std::string re = get_or<std::string>(s, "reevaluation", "at_t3");
        if (re == "disabled") c.mode2.reevaluation = ReevaluationPolicy::Disabled;
        else if (re == "at_t3") c.mode2.reevaluation = ReevaluationPolicy::AtT3;
        else if (re == "every_slot") c.mode2.reevaluation = ReevaluationPolicy::EverySlot;
        else fail("mode2.reevaluation", "allowed {disabled,at_t3,every_slot}, given " + re);
    }
    if (j.contains("power")) {
        const auto& s = j.at("power");
        c.power.p_max_dbm = get_or(s, "p_max_dbm", c.power.p_max_dbm);
        c.power.use_dl_pathloss = get_or(s, "use_dl_pathloss", c.power.use_dl_pathloss);
        c.power.p0_dl_dbm = get_or(s, "p0_dl_dbm", c.power.p0_dl_dbm);
        c.power.alpha_dl = get_or(s, "alpha_dl", c.power.alpha_dl);
        c.power.use_sl_pathloss = get_or(s, "use_sl_pathloss", c.power.use_sl_pathloss);
        c.power.p0_sl_dbm = get_or(s, "p0_sl_dbm", c.power.p0_sl_dbm);
        c.power.alpha_sl = get_or(s, "alpha_sl", c.power.alpha_sl);
        c.power.p0_psfch_dbm = get_or(s, "p0_psfch_dbm", c.power.p0_psfch_dbm);
        c.power.alpha_psfch = get_or(s, "alpha_psfch", c.power.alpha_psfch);
        c.power.p0_sssb_dbm = get_or(s, "p0_sssb_dbm", c.power.p0_sssb_dbm);
        c.power.alpha_sssb = get_or(s, "alpha_sssb", c.power.alpha_sssb);
    }
    if (j.contains("congestion")) {
        const auto& s = j.at("congestion");
        c.congestion.enabled = get_or(s, "enabled", c.congestion.enabled);
        if (s.contains("table")) {
            const auto& t = s.at("table");
            c.congestion.table.cbr_upper = t.at("cbr_upper").get<std::vector<double>>();
            c.congestion.table.cr_limit.clear();
            for (const auto& row : t.at("cr_limit")) {
                if (row.is_number())
                    c.congestion.table.cr_limit.push_back(std::vector<double>(8, row.get<double>()));
                else
                    c.congestion.table.cr_limit.push_back(row.get<std::vector<double>>());
            }
        }
        c.congestion.window_scaled = get_or(s, "window_scaled", c.congestion.window_scaled);
        c.congestion.cr_window_scaled = get_or(s, "cr_window_scaled", c.congestion.cr_window_scaled);
        c.congestion.rssi_threshold_index =
            get_or(s, "rssi_threshold_index", c.congestion.rssi_threshold_index);
        c.congestion.b_split = get_or(s, "b_split", c.congestion.b_split);
        c.congestion.processing_capability =
            get_or(s, "processing_capability", c.congestion.processing_capability);
        if (s.contains("enforce")) {
            const auto& e = s.at("enforce");
            c.congestion.enforce.power_step_db =
                get_or(e, "power_step_db", c.congestion.enforce.power_step_db);
            c.congestion.enforce.max_backoff_db =
                get_or(e, "max_backoff_db", c.congestion.enforce.max_backoff_db);
        }
    }
    if (j.contains("sync")) {
        const auto& s = j.at("sync");
        const std::string mode = get_or<std::string>(s, "mode", "disabled");
        if (mode == "gnss_based") c.sync.mode = SyncMode::GnssBased;
        else if (mode == "gnb_based") c.sync.mode = SyncMode::GnbBased;
        else if (mode == "disabled") c.sync.mode = SyncMode::Disabled;
        else fail("sync.mode", "allowed {gnss_based,gnb_based,disabled}, given " + mode);
        c.sync.syncref_rsrp_threshold_dbm =
            get_or(s, "syncref_rsrp_threshold_dbm", c.sync.syncref_rsrp_threshold_dbm);
        c.sync.sssb_trigger_threshold_dbm =
            get_or(s, "sssb_trigger_threshold_dbm", c.sync.sssb_trigger_threshold_dbm);
        if (s.contains("network_configured_tx") && !s.at("network_configured_tx").is_null())
            c.sync.network_configured_tx = s.at("network_configured_tx").get<bool>();
        c.sync.disable_levels_4_to_6 =
            get_or(s, "disable_levels_4_to_6", c.sync.disable_levels_4_to_6);
        c.sync.require_common_reference =
            get_or(s, "require_common_reference", c.sync.require_common_reference);
        c.sync.sssb_decode_threshold_db =
            get_or(s, "sssb_decode_threshold_db", c.sync.sssb_decode_threshold_db);
    }
    if (j.contains("gnb")) {
        const auto& s = j.at("gnb");
        if (s.contains("anchors")) {
            c.gnb.anchors.clear();
            for (const auto& a : s.at("anchors")) {
                if (!a.is_array() || a.size() != 3) fail("gnb.anchors", "expected [x,y,height] triples");
                c.gnb.anchors.push_back({a[0].get<double>(), a[1].get<double>(), a[2].get<double>()});
            }
        }
        c.gnb.tx_power_dbm = get_or(s, "tx_power_dbm", c.gnb.tx_power_dbm);
        c.gnb.coverage_rsrp_dbm = get_or(s, "coverage_rsrp_dbm", c.gnb.coverage_rsrp_dbm);
    }
    if (j.contains("radio")) {
        const auto& s = j.at("radio");
        c.radio.noise.noise_figure_db = get_or(s, "noise_figure_db", c.radio.noise.noise_figure_db);
        c.radio.link.data_symbols = get_or(s, "data_symbols", c.radio.link.data_symbols);
        c.radio.link.sci2_bits = get_or(s, "sci2_bits", c.radio.link.sci2_bits);
        c.radio.link.impl_margin_db = get_or(s, "impl_margin_db", c.radio.link.impl_margin_db);
        c.radio.link.sci_margin_db = get_or(s, "sci_margin_db", c.radio.link.sci_margin_db);
        if (s.contains("spectral_efficiency"))
            c.radio.link.spectral_efficiency = s.at("spectral_efficiency").get<std::vector<double>>();
        c.radio.soft_decode = get_or(s, "soft_decode", c.radio.soft_decode);
        c.radio.soft_slope_db = get_or(s, "soft_slope_db", c.radio.soft_slope_db);
        c.radio.max_simultaneous_psfch =
            get_or(s, "max_simultaneous_psfch", c.radio.max_simultaneous_psfch);
    }
    if (j.contains("channel")) {
        const auto& s = j.at("channel");
        c.channel.geometric_blockers = get_or(s, "geometric_blockers", c.channel.geometric_blockers);
        c.channel.shadow_decorrelation_m =
            get_or(s, "shadow_decorrelation_m", c.channel.shadow_decorrelation_m);
        c.channel.fading_margin_db = get_or(s, "fading_margin_db", c.channel.fading_margin_db);
        c.channel.default_blocker_height_m =
            get_or(s, "default_blocker_height_m", c.channel.default_blocker_height_m);
        if (s.contains("blockage")) {
            const auto& b = s.at("blockage");
            auto& m = c.channel.blockage;
            m.below_mean_base = get_or(b, "below_mean_base", m.below_mean_base);
            m.below_mean_coef = get_or(b, "below_mean_coef", m.below_mean_coef);
            m.below_mean_floor = get_or(b, "below_mean_floor", m.below_mean_floor);
            m.below_sigma = get_or(b, "below_sigma", m.below_sigma);
            m.mixed_mean_base = get_or(b, "mixed_mean_base", m.mixed_mean_base);
            m.mixed_mean_coef = get_or(b, "mixed_mean_coef", m.mixed_mean_coef);
            m.mixed_mean_floor = get_or(b, "mixed_mean_floor", m.mixed_mean_floor);
            m.mixed_sigma = get_or(b, "mixed_sigma", m.mixed_sigma);
        }
    }
    c.zone_side_m = get_or(j, "zone_side_m", c.zone_side_m);
    c.seed = get_or(j, "seed", c.seed);
    c.duration_s = get_or(j, "duration_s", c.duration_s);
    c.warmup_s = get_or(j, "warmup_s", c.warmup_s);
    if (j.contains("engine")) {
        const auto& s = j.at("engine");
        c.engine.threads = get_or(s, "threads", c.engine.threads);
        c.engine.max_interest_range_m =
            get_or(s, "max_interest_range_m", c.engine.max_interest_range_m);
        c.engine.cbr_sample_period_slots =
            get_or(s, "cbr_sample_period_slots", c.engine.cbr_sample_period_slots);
        c.engine.rsrp_ema_coefficient =
            get_or(s, "rsrp_ema_coefficient", c.engine.rsrp_ema_coefficient);
    }
    if (j.contains("metrics")) {
        const auto& s = j.at("metrics");
        if (s.contains("pir_distances_m"))
            c.metrics.pir_distances_m = s.at("pir_distances_m").get<std::vector<double>>();
        if (s.contains("prr_baseline_m") && !s.at("prr_baseline_m").is_null())
            c.metrics.prr_baseline_m = s.at("prr_baseline_m").get<double>();
    }

    c.pool.numerology = Numerology{c.mu, c.cp};
    c.channel.scenario = c.layout.kind == RoadLayout::Kind::Highway ? ScenarioKind::Highway
                                                                    : ScenarioKind::UrbanGrid;
    c.channel.carrier_ghz = c.carrier_ghz;
    c.validate();
    return c;
}

}  // namespace

void SimConfig::validate() const {
    make_numerology(mu, cp, carrier_ghz);  // throws on bad combinations
    layout.validate();
    if (dropping.option == DropOption::C && layout.kind == RoadLayout::Kind::UrbanGrid)
        throw ConfigError("dropping.option: option C is highway-only");
    ResourcePool p = pool;
    p.numerology = Numerology{mu, cp};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (traffic.priority < 1 || traffic.priority > 8)
        throw ConfigError("traffic.priority: allowed [1,8], given " +
                          std::to_string(traffic.priority));
    if (traffic.groupcast_option != 1 && traffic.groupcast_option != 2)
        throw ConfigError("traffic.groupcast.option: allowed {1,2}");
    if (traffic.harq_feedback && !p.psfch.enabled())
        throw ConfigError("traffic.harq_feedback: requires pool.psfch.period > 0");
    if (mode2.keep_probability < 0.0 || mode2.keep_probability > 0.8)
        throw ConfigError("mode2.keep_probability: allowed [0,0.8], given " +
                          std::to_string(mode2.keep_probability));
    if (mode2.num_transmissions < 1 || mode2.num_transmissions > p.n_max)
        throw ConfigError("mode2.num_transmissions: allowed [1,n_max]");
    if (mode2.t2min_ms.size() != 8) throw ConfigError("mode2.t2min_ms: 8 entries required");
    for (int v : mode2.t2min_ms)
        if (v != 1 && v != 5 && v != 10 && v != 20)
            throw ConfigError("mode2.t2min_ms: allowed {1,5,10,20}, given " + std::to_string(v));
    auto check_alpha = [](double a, const std::string& key) {
        if (a < 0.0 || a > 1.0) throw ConfigError(key + ": allowed [0,1]");
    };
    check_alpha(power.alpha_dl, "power.alpha_dl");
    check_alpha(power.alpha_sl, "power.alpha_sl");
    check_alpha(power.alpha_psfch, "power.alpha_psfch");
    check_alpha(power.alpha_sssb, "power.alpha_sssb");
    if (power.use_sl_pathloss && traffic.cast != CastType::Unicast)
        throw ConfigError("power.use_sl_pathloss: SL-pathloss power control is unicast-only");
    try {
        congestion.table.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("congestion.table: ") + e.what());
    }
    if (congestion.rssi_threshold_index < 0 || congestion.rssi_threshold_index > 45)
        throw ConfigError("congestion.rssi_threshold_index: allowed [0,45]");
    if (congestion.processing_capability != 1 && congestion.processing_capability != 2)
        throw ConfigError("congestion.processing_capability: allowed {1,2}");
    const int cr_window = congestion.cr_window_slots(mu);
    if (congestion.b_split < 0 || 2 * congestion.b_split >= cr_window)
        throw ConfigError("congestion.b_split: must satisfy b < window/2");
    if (radio.link.spectral_efficiency.empty())
        throw ConfigError("radio.spectral_efficiency: at least one MCS required");
    if (radio.link.data_symbols < 1 || radio.link.data_symbols > 14)
        throw ConfigError("radio.data_symbols: allowed [1,14]");
    if (radio.max_simultaneous_psfch < 1)
        throw ConfigError("radio.max_simultaneous_psfch: must be >= 1");
    if (zone_side_m != 5 && zone_side_m != 10 && zone_side_m != 20 && zone_side_m != 30 &&
        zone_side_m != 40 && zone_side_m != 50)
        throw ConfigError("zone_side_m: allowed {5,10,20,30,40,50}, given " +
                          std::to_string(zone_side_m));
    if (duration_s < 0.0) throw ConfigError("duration_s: must be non-negative");
    if (warmup_s < 0.0) throw ConfigError("warmup_s: must be non-negative");
    if (engine.threads < 1) throw ConfigError("engine.threads: must be >= 1");
    if (sync.mode == SyncMode::GnbBased && gnb.anchors.empty() &&
        sync.network_configured_tx.has_value() && *sync.network_configured_tx)
        throw ConfigError("sync.network_configured_tx: requires gnb.anchors");
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

SimConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    return parse_config(j);
}

std::string config_to_json(const SimConfig& c) {
    json j;
    j["scenario"] = {{"kind", c.layout.kind == RoadLayout::Kind::Highway ? "highway" : "urban_grid"},
                     {"length_m", c.layout.highway_length_m},
                     {"lane_width_m", c.layout.highway_lane_width_m},
                     {"blocks_x", c.layout.blocks_x},
                     {"blocks_y", c.layout.blocks_y},
                     {"block_dx_m", c.layout.block_dx_m},
                     {"block_dy_m", c.layout.block_dy_m},
                     {"urban_lane_width_m", c.layout.urban_lane_width_m}};
    const char* opt = c.dropping.option == DropOption::A ? "A"
                      : c.dropping.option == DropOption::B ? "B" : "C";
    j["dropping"] = {{"option", opt},
                     {"highway_low_speed", c.dropping.highway_low_speed},
                     {"max_vehicles", c.dropping.max_vehicles},
                     {"min_gap_m", c.dropping.min_gap_m}};
    j["numerology"] = {{"mu", c.mu}, {"cp", c.cp == CyclicPrefix::Normal ? "normal" : "extended"}};
    j["carrier_ghz"] = c.carrier_ghz;
    j["pool"] = pool_to_json(c.pool);
    j["traffic"] = {{"model", to_string(c.traffic.model)},
                    {"priority", c.traffic.priority},
                    {"cast", c.traffic.cast == CastType::Broadcast   ? "broadcast"
                             : c.traffic.cast == CastType::Groupcast ? "groupcast"
                                                                     : "unicast"},
                    {"groupcast",
                     {{"option", c.traffic.groupcast_option},
                      {"k_nearest", c.traffic.groupcast_k_nearest},
                      {"range_m", c.traffic.groupcast_range_m}}},
                    {"harq_feedback", c.traffic.harq_feedback}};
    json m2 = {{"keep_probability", c.mode2.keep_probability},
               {"num_transmissions", c.mode2.num_transmissions},
               {"t2min_ms", c.mode2.t2min_ms},
               {"reevaluation", c.mode2.reevaluation == ReevaluationPolicy::Disabled ? "disabled"
                                : c.mode2.reevaluation == ReevaluationPolicy::AtT3   ? "at_t3"
                                                                                     : "every_slot"}};
    if (c.mode2.t2_ms) m2["t2_ms"] = *c.mode2.t2_ms;
    j["mode2"] = m2;
    j["power"] = {{"p_max_dbm", c.power.p_max_dbm},
                  {"use_dl_pathloss", c.power.use_dl_pathloss},
                  {"p0_dl_dbm", c.power.p0_dl_dbm},
                  {"alpha_dl", c.power.alpha_dl},
                  {"use_sl_pathloss", c.power.use_sl_pathloss},
                  {"p0_sl_dbm", c.power.p0_sl_dbm},
                  {"alpha_sl", c.power.alpha_sl},
                  {"p0_psfch_dbm", c.power.p0_psfch_dbm},
                  {"alpha_psfch", c.power.alpha_psfch},
                  {"p0_sssb_dbm", c.power.p0_sssb_dbm},
                  {"alpha_sssb", c.power.alpha_sssb}};
    json ctab = {{"cbr_upper", c.congestion.table.cbr_upper},
                 {"cr_limit", c.congestion.table.cr_limit}};
    j["congestion"] = {{"enabled", c.congestion.enabled},
                       {"table", ctab},
                       {"window_scaled", c.congestion.window_scaled},
                       {"cr_window_scaled", c.congestion.cr_window_scaled},
                       {"rssi_threshold_index", c.congestion.rssi_threshold_index},
                       {"b_split", c.congestion.b_split},
                       {"processing_capability", c.congestion.processing_capability},
                       {"enforce",
                        {{"power_step_db", c.congestion.enforce.power_step_db},
                         {"max_backoff_db", c.congestion.enforce.max_backoff_db}}}};
    json sync = {{"mode", c.sync.mode == SyncMode::GnssBased  ? "gnss_based"
                          : c.sync.mode == SyncMode::GnbBased ? "gnb_based"
                                                              : "disabled"},
                 {"syncref_rsrp_threshold_dbm", c.sync.syncref_rsrp_threshold_dbm},
                 {"sssb_trigger_threshold_dbm", c.sync.sssb_trigger_threshold_dbm},
                 {"disable_levels_4_to_6", c.sync.disable_levels_4_to_6},
                 {"require_common_reference", c.sync.require_common_reference},
                 {"sssb_decode_threshold_db", c.sync.sssb_decode_threshold_db}};
    if (c.sync.network_configured_tx) sync["network_configured_tx"] = *c.sync.network_configured_tx;
    j["sync"] = sync;
    json anchors = json::array();
    for (const Vec3& a : c.gnb.anchors) anchors.push_back({a.x, a.y, a.z});
    j["gnb"] = {{"anchors", anchors},
                {"tx_power_dbm", c.gnb.tx_power_dbm},
                {"coverage_rsrp_dbm", c.gnb.coverage_rsrp_dbm}};
    j["radio"] = {{"noise_figure_db", c.radio.noise.noise_figure_db},
                  {"data_symbols", c.radio.link.data_symbols},
                  {"sci2_bits", c.radio.link.sci2_bits},
                  {"impl_margin_db", c.radio.link.impl_margin_db},
                  {"sci_margin_db", c.radio.link.sci_margin_db},
                  {"spectral_efficiency", c.radio.link.spectral_efficiency},
                  {"soft_decode", c.radio.soft_decode},
                  {"soft_slope_db", c.radio.soft_slope_db},
                  {"max_simultaneous_psfch", c.radio.max_simultaneous_psfch}};
    j["channel"] = {{"geometric_blockers", c.channel.geometric_blockers},
                    {"shadow_decorrelation_m", c.channel.shadow_decorrelation_m},
                    {"fading_margin_db", c.channel.fading_margin_db},
                    {"default_blocker_height_m", c.channel.default_blocker_height_m},
                    {"blockage",
                     {{"below_mean_base", c.channel.blockage.below_mean_base},
                      {"below_mean_coef", c.channel.blockage.below_mean_coef},
                      {"below_mean_floor", c.channel.blockage.below_mean_floor},
                      {"below_sigma", c.channel.blockage.below_sigma},
                      {"mixed_mean_base", c.channel.blockage.mixed_mean_base},
                      {"mixed_mean_coef", c.channel.blockage.mixed_mean_coef},
                      {"mixed_mean_floor", c.channel.blockage.mixed_mean_floor},
                      {"mixed_sigma", c.channel.blockage.mixed_sigma}}}};
    j["zone_side_m"] = c.zone_side_m;
    j["seed"] = c.seed;
    j["duration_s"] = c.duration_s;
    j["warmup_s"] = c.warmup_s;
    j["engine"] = {{"threads", c.engine.threads},
                   {"max_interest_range_m", c.engine.max_interest_range_m},
                   {"cbr_sample_period_slots", c.engine.cbr_sample_period_slots},
                   {"rsrp_ema_coefficient", c.engine.rsrp_ema_coefficient}};
    json met = {{"pir_distances_m", c.metrics.pir_distances_m}};
    if (c.metrics.prr_baseline_m) met["prr_baseline_m"] = *c.metrics.prr_baseline_m;
    j["metrics"] = met;
    return j.dump(2);
}

SimConfig default_config() {
    SimConfig c;
    c.layout.kind = RoadLayout::Kind::Highway;
    c.layout.highway_length_m = 2000.0;
    c.dropping.option = DropOption::A;
    c.mu = 0;
    c.carrier_ghz = 6.0;

    c.pool.numerology = Numerology{0, CyclicPrefix::Normal};
    c.pool.num_subchannels = 5;
    c.pool.subchannel_prbs = 10;
    c.pool.slot_bitmap.assign(10, 1);
    c.pool.sl_symbol_start = 0;
    c.pool.sl_symbol_count = 14;
    c.pool.pscch = {2, 10};
    c.pool.psfch.period = 0;
    c.pool.rri_list_ms = {100};
    c.pool.rsrp_threshold_dbm.assign(8, std::vector<double>(8, -110.0));
    c.pool.x_percent_by_priority.assign(8, 20);
    c.pool.n_max = 2;
    c.pool.max_n_sci = 2;
    c.pool.t0_ms = 1100;

    c.mode2.t2min_ms.assign(8, 20);
    c.mode2.num_transmissions = 1;

    return c;
}

}  // namespace nrv2x
