#include "nrv2x/radio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nrv2x {

double sinr_db(const RxContribution& target, const std::vector<RxContribution>& interferers,
               const NoiseModel& noise, int scs_khz) {
    const double s_mw = dbm_to_mw(target.power_dbm);
    double denom_mw = dbm_to_mw(noise.noise_dbm(target.span.count, scs_khz));
    for (const RxContribution& i : interferers) {
        const int ov = i.span.overlap(target.span);
        if (ov == 0) continue;
        denom_mw += dbm_to_mw(i.power_dbm) * static_cast<double>(ov) / i.span.count;
    }
    return linear_to_db(s_mw / denom_mw);
}

double rssi_dbm(const std::vector<RxContribution>& contributions, const PrbSpan& span,
                const NoiseModel& noise, int scs_khz) {
    double total_mw = dbm_to_mw(noise.noise_dbm(span.count, scs_khz));
    for (const RxContribution& c : contributions) {
        const int ov = c.span.overlap(span);
        if (ov == 0) continue;
        total_mw += dbm_to_mw(c.power_dbm) * static_cast<double>(ov) / c.span.count;
    }
    return mw_to_dbm(total_mw);
}

bool decode(const DecodeModel& model, DecodeKind kind, double sinr_db_value, int mcs,
            RngStream* rng) {
    double threshold;
    if (kind == DecodeKind::Sci) {
        threshold = model.sci_threshold_db;
    } else {
        if (mcs < 0 || mcs >= static_cast<int>(model.tb_threshold_db.size()))
            throw std::out_of_range("decode: MCS index outside threshold table");
        threshold = model.tb_threshold_db[static_cast<size_t>(mcs)];
    }
    if (!model.soft) return sinr_db_value >= threshold;
    if (rng == nullptr) throw std::invalid_argument("decode: soft mode requires an RNG");
    const double p = 1.0 / (1.0 + std::exp(-(sinr_db_value - threshold) / model.soft_slope_db));
    return rng->uniform() < p;
}

LinkAbstraction default_link_abstraction() {
    LinkAbstraction la;
    la.spectral_efficiency = {0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
                              1.9141, 2.4063, 2.7305, 3.3223, 4.1211, 5.1152};
    return la;
}

DecodeModel make_decode_model(const LinkAbstraction& la) {
    DecodeModel dm;
    dm.tb_threshold_db.reserve(la.spectral_efficiency.size());
    for (double se : la.spectral_efficiency)
        dm.tb_threshold_db.push_back(10.0 * std::log10(std::pow(2.0, se) - 1.0) +
                                     la.impl_margin_db);
    const double lowest =
        *std::min_element(dm.tb_threshold_db.begin(), dm.tb_threshold_db.end());
    dm.sci_threshold_db = lowest - la.sci_margin_db;
    return dm;
}

std::int64_t capacity_bits(const LinkAbstraction& la, int mcs, int l_pssch, int m_sub,
                           int pscch_prbs, int pscch_symbols) {
    const double se = la.spectral_efficiency.at(static_cast<size_t>(mcs));
    const std::int64_t res =
        static_cast<std::int64_t>(l_pssch) * m_sub * la.data_symbols -
        static_cast<std::int64_t>(pscch_prbs) * pscch_symbols;
    if (res <= 0) return 0;
    const auto raw = static_cast<std::int64_t>(std::floor(se * 12.0 * static_cast<double>(res)));
    return std::max<std::int64_t>(0, raw - la.sci2_bits);
}

std::optional<McsFit> fit_tb(const LinkAbstraction& la, std::int64_t tb_bits, int max_l,
                             int m_sub, int pscch_prbs, int pscch_symbols, int min_mcs) {
    for (int mcs = min_mcs; mcs < static_cast<int>(la.spectral_efficiency.size()); ++mcs) {
        if (capacity_bits(la, mcs, max_l, m_sub, pscch_prbs, pscch_symbols) < tb_bits) continue;
        for (int l = 1; l <= max_l; ++l) {
            if (capacity_bits(la, mcs, l, m_sub, pscch_prbs, pscch_symbols) >= tb_bits)
                return McsFit{mcs, l};
        }
    }
    return std::nullopt;
}

AllowedActions half_duplex_filter(const SlotIntents& intents, int max_simultaneous_psfch) {
    AllowedActions out;
    if (intents.pssch_tx) {
        out.can_receive_pssch = false;
        out.psfch_rx_allowed = false;
    }

    if (intents.psfch_tx.empty()) return out;

    // PSFCH TX vs PSFCH RX in the same symbol: the side with the better
    // associated-PSSCH priority wins; ties go to the transmitter.
    bool transmit_side = true;
    if (out.psfch_rx_allowed && !intents.psfch_rx.empty()) {
        int best_tx = 9, best_rx = 9;
        for (const PsfchDuty& d : intents.psfch_tx) best_tx = std::min(best_tx, d.priority);
        for (const PsfchDuty& d : intents.psfch_rx) best_rx = std::min(best_rx, d.priority);
        transmit_side = !higher_priority(best_rx, best_tx);
    }
    if (!transmit_side) return out;  // receive; send no PSFCH

    out.psfch_rx_allowed = false;
    std::vector<size_t> order(intents.psfch_tx.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return higher_priority(intents.psfch_tx[a].priority, intents.psfch_tx[b].priority);
    });
    const size_t cap = max_simultaneous_psfch > 0
                           ? std::min(order.size(), static_cast<size_t>(max_simultaneous_psfch))
                           : order.size();
    order.resize(cap);
    std::sort(order.begin(), order.end());
    out.psfch_tx_selected = std::move(order);
    return out;
}

}  // namespace nrv2x
