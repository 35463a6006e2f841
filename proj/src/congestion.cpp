#include "nrv2x/congestion.hpp"

#include <algorithm>
#include <cmath>

namespace nrv2x {

void CongestionTable::validate() const {
    if (cbr_upper.empty() || cbr_upper.size() > 16)
        throw std::invalid_argument("congestion table: between 1 and 16 CBR ranges required");
    if (cbr_upper.size() != cr_limit.size())
        throw std::invalid_argument("congestion table: one limit row per CBR range required");
    double prev = 0.0;
    for (double u : cbr_upper) {
        if (u <= prev || u > 1.0 + 1e-12)
            throw std::invalid_argument("congestion table: CBR bounds must ascend and end at 1");
        prev = u;
    }
    if (std::abs(cbr_upper.back() - 1.0) > 1e-9)
        throw std::invalid_argument("congestion table: ranges must cover [0,1]");
    for (const auto& row : cr_limit)
        if (row.size() != 8)
            throw std::invalid_argument("congestion table: 8 priorities per range required");
    for (size_t p = 0; p < 8; ++p)
        for (size_t r = 1; r < cr_limit.size(); ++r)
            if (cr_limit[r][p] > cr_limit[r - 1][p] + 1e-12)
                throw std::invalid_argument(
                    "congestion table: CR limit must be non-increasing across CBR ranges");
}

double CongestionTable::limit_for(double cbr, int priority) const {
    const size_t p = static_cast<size_t>(std::clamp(priority, 1, 8) - 1);
    for (size_t r = 0; r < cbr_upper.size(); ++r)
        if (cbr <= cbr_upper[r] + 1e-12) return cr_limit[r][p];
    return cr_limit.back()[p];
}

CongestionTable CongestionTable::permissive() {
    CongestionTable t;
    t.cbr_upper = {1.0};
    t.cr_limit = {std::vector<double>(8, 1.0)};
    return t;
}

double sl_cr(const std::vector<int>& past_used, const std::vector<int>& future_used,
             int subchannels, int a, int b) {
    if (a <= 0) throw std::invalid_argument("sl_cr: a must be positive");
    if (b < 0) throw std::invalid_argument("sl_cr: b must be non-negative");
    if (2 * b >= a + b + 1) throw std::invalid_argument("sl_cr: b must satisfy b < (a+b+1)/2");
    long used = 0;
    for (int u : past_used) used += u;
    for (int u : future_used) used += u;
    return static_cast<double>(used) /
           (static_cast<double>(subchannels) * (static_cast<double>(a) + b + 1));
}

void validate_cr_split(int a, int b, Slot n, Slot last_selected_slot) {
    if (a <= 0) throw std::invalid_argument("sl_cr: a must be positive");
    if (b < 0) throw std::invalid_argument("sl_cr: b must be non-negative");
    if (2 * b >= a + b + 1) throw std::invalid_argument("sl_cr: b must satisfy b < (a+b+1)/2");
    if (n + b > last_selected_slot)
        throw std::invalid_argument("sl_cr: n+b must not exceed the last selected resource");
}

std::string to_string(EnforceAction a) {
    switch (a) {
        case EnforceAction::None: return "none";
        case EnforceAction::McsRaised: return "mcs_raised";
        case EnforceAction::LReduced: return "l_reduced";
        case EnforceAction::NReduced: return "n_reduced";
        case EnforceAction::PowerReduced: return "power_reduced";
        case EnforceAction::Dropped: return "dropped";
    }
    return "?";
}

EnforceAction enforce(const std::function<double(const TxKnobs&)>& projected_cr, double cbr,
                      int priority, const CongestionTable& table, TxKnobs& knobs,
                      const EnforceLimits& limits) {
    const double limit = table.limit_for(cbr, priority);
    if (projected_cr(knobs) <= limit) return EnforceAction::None;

    EnforceAction last = EnforceAction::None;
    while (knobs.min_mcs + 1 < limits.mcs_count) {
        knobs.min_mcs += 1;
        last = EnforceAction::McsRaised;
        if (projected_cr(knobs) <= limit) return last;
    }
    while (knobs.max_l_pssch > 1) {
        knobs.max_l_pssch -= 1;
        last = EnforceAction::LReduced;
        if (projected_cr(knobs) <= limit) return last;
    }
    while (knobs.n_max > 1) {
        knobs.n_max -= 1;
        last = EnforceAction::NReduced;
        if (projected_cr(knobs) <= limit) return last;
    }
    while (knobs.power_backoff_db + limits.power_step_db <= limits.max_backoff_db + 1e-9) {
        knobs.power_backoff_db += limits.power_step_db;
        last = EnforceAction::PowerReduced;
        if (projected_cr(knobs) <= limit) return last;
    }
    knobs.drop = true;
    return EnforceAction::Dropped;
}

}  // namespace nrv2x
