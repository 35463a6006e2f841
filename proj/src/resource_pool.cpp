#include "nrv2x/resource_pool.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nrv2x {

namespace {

const int kAllowedSubchannelSizes[] = {10, 12, 15, 20, 25, 50, 75, 100};
const int kAllowedPscchPrbs[] = {10, 12, 15, 20, 25};

bool rri_value_allowed(int ms) {
    if (ms == 0) return true;
    if (ms >= 1 && ms <= 99) return true;
    return ms >= 100 && ms <= 1000 && ms % 100 == 0;
}

// Sidelink slots within one complete bitmap repetition.
int bitmap_popcount(const std::vector<uint8_t>& bm) {
    int c = 0;
    for (uint8_t b : bm) c += b ? 1 : 0;
    return c;
}

}  // namespace

void ResourcePool::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("pool." + msg); };

    if (num_subchannels < 1) fail("num_subchannels: must be >= 1");
    if (std::find(std::begin(kAllowedSubchannelSizes), std::end(kAllowedSubchannelSizes),
                  subchannel_prbs) == std::end(kAllowedSubchannelSizes))
        fail("subchannel_prbs: allowed {10,12,15,20,25,50,75,100}, given " +
             std::to_string(subchannel_prbs));
    if (slot_bitmap.size() < 10 || slot_bitmap.size() > 160)
        fail("slot_bitmap: length must be within [10,160], given " +
             std::to_string(slot_bitmap.size()));
    if (bitmap_popcount(slot_bitmap) == 0) fail("slot_bitmap: no sidelink slots configured");
    if (sl_symbol_count < 7 || sl_symbol_count > numerology.symbols_per_slot())
        fail("sl_symbol_count: must be within [7," +
             std::to_string(numerology.symbols_per_slot()) + "]");
    if (sl_symbol_start < 0 || sl_symbol_start + sl_symbol_count > numerology.symbols_per_slot())
        fail("sl_symbol_start: symbols exceed the slot");
    if (pscch.symbols != 2 && pscch.symbols != 3) fail("pscch.symbols: allowed {2,3}");
    if (std::find(std::begin(kAllowedPscchPrbs), std::end(kAllowedPscchPrbs), pscch.prbs) ==
        std::end(kAllowedPscchPrbs))
        fail("pscch.prbs: allowed {10,12,15,20,25}, given " + std::to_string(pscch.prbs));
    if (pscch.prbs > subchannel_prbs)
        fail("pscch.prbs: must fit within one sub-channel (" + std::to_string(pscch.prbs) +
             " > " + std::to_string(subchannel_prbs) + ")");

    if (psfch.period != 0 && psfch.period != 1 && psfch.period != 2 && psfch.period != 4)
        fail("psfch.period: allowed {0,1,2,4}, given " + std::to_string(psfch.period));
    if (psfch.enabled()) {
        if (psfch.min_gap != 2 && psfch.min_gap != 3) fail("psfch.min_gap: allowed {2,3}");
        if (psfch.cs_pairs != 1 && psfch.cs_pairs != 2 && psfch.cs_pairs != 3 &&
            psfch.cs_pairs != 6)
            fail("psfch.cs_pairs: allowed {1,2,3,6}, given " + std::to_string(psfch.cs_pairs));
        if (psfch.offset() < 0 || psfch.offset() >= psfch.period)
            fail("psfch.bearer_offset: must be within [0,period)");
        if (!psfch.prb_bitmap.empty() &&
            static_cast<int>(psfch.prb_bitmap.size()) != total_prbs())
            fail("psfch.prb_bitmap: length must equal L*M_sub = " + std::to_string(total_prbs()));
        const int m = psfch_m();
        if (m == 0) fail("psfch.prb_bitmap: no usable PRBs");
        if (m % (psfch.period * num_subchannels) != 0)
            fail("psfch.prb_bitmap: usable PRBs (" + std::to_string(m) +
                 ") must be a multiple of N*L = " +
                 std::to_string(psfch.period * num_subchannels));
    }

    if (rri_list_ms.empty() || rri_list_ms.size() > 16)
        fail("rri_list_ms: between 1 and 16 values required");
    for (int rri : rri_list_ms)
        if (!rri_value_allowed(rri))
            fail("rri_list_ms: allowed {0,[1..99],100,200,...,1000}, given " + std::to_string(rri));

    if (rsrp_threshold_dbm.size() != 8) fail("rsrp_threshold_dbm: 8x8 table required");
    for (const auto& row : rsrp_threshold_dbm)
        if (row.size() != 8) fail("rsrp_threshold_dbm: 8x8 table required");
    if (x_percent_by_priority.size() != 8) fail("x_percent_by_priority: 8 entries required");
    for (int x : x_percent_by_priority)
        if (x != 20 && x != 35 && x != 50)
            fail("x_percent_by_priority: allowed {20,35,50}, given " + std::to_string(x));

    if (n_max < 1 || n_max > 32) fail("n_max: must be within [1,32]");
    if (max_n_sci != 2 && max_n_sci != 3) fail("max_n_sci: allowed {2,3}");
    if (t0_ms != 1100 && t0_ms != 100) fail("t0_ms: allowed {1100,100}");
}

std::optional<Slot> pool_slot_index(Slot absolute_slot, const ResourcePool& pool) {
    if (absolute_slot < 0) return std::nullopt;
    const std::int64_t period = pool.period_slots();
    const auto& bm = pool.slot_bitmap;
    const std::int64_t len = static_cast<std::int64_t>(bm.size());

    const std::int64_t k = absolute_slot % period;
    if (!bm[static_cast<size_t>(k % len)]) return std::nullopt;

    // Sidelink slots inside one full period (the last bitmap chunk may be
    // truncated at the period boundary).
    const int per_chunk = [&] {
        int c = 0;
        for (uint8_t b : bm) c += b ? 1 : 0;
        return c;
    }();
    auto count_in_period_prefix = [&](std::int64_t upto) {  // slots in [0, upto)
        const std::int64_t chunks = upto / len;
        const std::int64_t rem = upto % len;
        std::int64_t c = chunks * per_chunk;
        for (std::int64_t i = 0; i < rem; ++i) c += bm[static_cast<size_t>(i)] ? 1 : 0;
        return c;
    };
    const std::int64_t per_period = count_in_period_prefix(period);
    const std::int64_t full_periods = absolute_slot / period;
    return full_periods * per_period + count_in_period_prefix(k);
}

Slot absolute_slot_of_pool_index(Slot pool_index, const ResourcePool& pool) {
    const std::int64_t period = pool.period_slots();
    const auto& bm = pool.slot_bitmap;
    const std::int64_t len = static_cast<std::int64_t>(bm.size());

    std::vector<std::int64_t> offsets;  // sidelink-slot offsets within one period
    for (std::int64_t k = 0; k < period; ++k)
        if (bm[static_cast<size_t>(k % len)]) offsets.push_back(k);
    const std::int64_t per_period = static_cast<std::int64_t>(offsets.size());

    const std::int64_t p = pool_index / per_period;
    const std::int64_t r = pool_index % per_period;
    return p * period + offsets[static_cast<size_t>(r)];
}

bool is_psfch_bearer(Slot pool_slot, const ResourcePool& pool) {
    if (!pool.psfch.enabled()) return false;
    return pool_slot % pool.psfch.period == pool.psfch.offset();
}

Slot psfch_slot_for(Slot pssch_pool_slot, const ResourcePool& pool) {
    if (!pool.psfch.enabled())
        throw std::logic_error("psfch_slot_for: PSFCH disabled in this pool");
    const int n = pool.psfch.period;
    const int o = pool.psfch.offset();
    const Slot earliest = pssch_pool_slot + pool.psfch.min_gap;
    // Smallest slot >= earliest congruent to o mod N.
    Slot m = earliest + ((o - earliest) % n + n) % n;
    return m;
}

int psfch_slot_in_window(Slot pssch_pool_slot, const ResourcePool& pool) {
    const Slot bearer = psfch_slot_for(pssch_pool_slot, pool);
    const Slot window_start = bearer - pool.psfch.min_gap - pool.psfch.period + 1;
    return static_cast<int>(pssch_pool_slot - window_start);
}

int psfch_prbs_for(const SlotResource& pssch, const ResourcePool& pool) {
    const int m_set = pool.psfch_m_set();
    return pool.psfch.option == PsfchOption::PssschSubchannels ? pssch.num_subchannels * m_set
                                                               : m_set;
}

int psfch_capacity(const SlotResource& pssch, const ResourcePool& pool) {
    return psfch_prbs_for(pssch, pool) * pool.psfch.cs_pairs;
}

PsfchResource psfch_resource(std::uint32_t tx_id, std::uint32_t rx_group_id,
                             const SlotResource& pssch, const ResourcePool& pool, bool ack) {
    if (!pool.psfch.enabled())
        throw std::logic_error("psfch_resource: PSFCH disabled in this pool");

    const std::vector<int> usable = pool.psfch_usable_prbs();
    const int m_set = pool.psfch_m_set();
    const int n = pool.psfch.period;
    const int w = psfch_slot_in_window(pssch.pool_slot, pool);

    // PRB pool for this transmission: the PRB set of each counted sub-channel
    // at this window position. Set x (x = subchannel*N + window position)
    // owns usable PRBs [x*M_set, (x+1)*M_set).
    const int first_subch = pssch.subchannel;
    const int counted = pool.psfch.option == PsfchOption::PssschSubchannels
                            ? pssch.num_subchannels
                            : 1;
    std::vector<int> prbs;
    prbs.reserve(static_cast<size_t>(counted * m_set));
    for (int c = first_subch; c < first_subch + counted; ++c) {
        const int set = c * n + w;
        for (int j = 0; j < m_set; ++j)
            prbs.push_back(usable[static_cast<size_t>(set * m_set + j)]);
    }

    const int f = static_cast<int>(prbs.size()) * pool.psfch.cs_pairs;
    const int i = static_cast<int>((tx_id + rx_group_id) % static_cast<std::uint32_t>(f));

    PsfchResource out;
    out.prb = prbs[static_cast<size_t>(i % static_cast<int>(prbs.size()))];
    out.cs_pair = i / static_cast<int>(prbs.size());
    out.shift = ack ? 1 : 0;
    return out;
}

int zone_id(const Vec2& pos, int zone_side_m) {
    const double s = static_cast<double>(zone_side_m);
    auto floor_mod64 = [&](double v) {
        const auto idx = static_cast<std::int64_t>(std::floor(v / s));
        return static_cast<int>(((idx % 64) + 64) % 64);
    };
    return floor_mod64(pos.x) + 64 * floor_mod64(pos.y);
}

double zone_distance(const Vec2& rx, int id, int zone_side_m) {
    const double s = static_cast<double>(zone_side_m);
    const int ix = id % 64;
    const int iy = id / 64;
    // Centers bearing this id repeat every 64 zones per axis; the nearest one
    // along each axis is within one repetition of the rounded estimate.
    auto nearest_axis = [&](double r, int i) {
        const double k = std::round((r / s - i - 0.5) / 64.0);
        double best = std::abs(r - (i + 64.0 * k + 0.5) * s);
        for (double kk : {k - 1.0, k + 1.0})
            best = std::min(best, std::abs(r - (i + 64.0 * kk + 0.5) * s));
        return best;
    };
    const double dx = nearest_axis(rx.x, ix);
    const double dy = nearest_axis(rx.y, iy);
    return std::hypot(dx, dy);
}

}  // namespace nrv2x
