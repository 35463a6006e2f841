#pragma once

#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrv2x/core.hpp"

namespace nrv2x {

/// CBR-indexed CR limits: up to 16 ranges partitioning [0,1], a limit per
/// (range, priority). Limits are non-increasing as the CBR range rises.
struct CongestionTable {
    std::vector<double> cbr_upper;                 // ascending, last == 1.0
    std::vector<std::vector<double>> cr_limit;     // [range][priority-1]

    void validate() const;
    double limit_for(double cbr, int priority) const;

    /// Single-range permissive table (congestion control inert).
    static CongestionTable permissive();
};

/// RSSI busy threshold (-112 + 2n) dBm with n in [0,45].
inline double cbr_rssi_threshold_dbm(int n) {
    if (n < 0 || n > 45)
        throw std::invalid_argument("cbr threshold index: allowed [0,45], given " +
                                    std::to_string(n));
    return -112.0 + 2.0 * n;
}

/// Sliding channel-busy-ratio meter: fraction of (sub-channel, slot) cells
/// above the RSSI threshold over the trailing window. Before the window
/// fills, the ratio is computed over the slots seen so far.
class CbrMeter {
  public:
    CbrMeter() = default;
    CbrMeter(int window_slots, int subchannels)
        : window_(window_slots), subchannels_(subchannels) {}

    void push_slot(int busy_subchannels) {
        busy_.push_back(busy_subchannels);
        busy_sum_ += busy_subchannels;
        if (static_cast<int>(busy_.size()) > window_) {
            busy_sum_ -= busy_.front();
            busy_.pop_front();
        }
    }

    double value() const {
        if (busy_.empty() || subchannels_ == 0) return 0.0;
        return static_cast<double>(busy_sum_) /
               (static_cast<double>(busy_.size()) * subchannels_);
    }

  private:
    int window_ = 100;
    int subchannels_ = 1;
    std::deque<int> busy_;
    long busy_sum_ = 0;
};

/// Channel-occupancy ratio over [n-a, n+b]: past usage plus already-selected
/// future usage, divided by all cells in the window. The caller supplies the
/// per-slot used-sub-channel counts for exactly those ranges.
double sl_cr(const std::vector<int>& past_used, const std::vector<int>& future_used,
             int subchannels, int a, int b);

/// Throws unless a > 0, b >= 0, b < (a+b+1)/2 and n+b does not exceed the
/// last selected resource.
void validate_cr_split(int a, int b, Slot n, Slot last_selected_slot);

/// Transmission knobs the congestion pipeline may adjust, in its fixed
/// order: raise MCS, shrink max sub-channels, shrink N_MAX, back off power;
/// transmissions still over the limit are dropped (reservation kept).
struct TxKnobs {
    int min_mcs = 0;
    int max_l_pssch = 1;
    int n_max = 1;
    double power_backoff_db = 0.0;
    bool drop = false;
};

struct EnforceLimits {
    int mcs_count = 1;             // exclusive upper bound for min_mcs
    double power_step_db = 3.0;
    double max_backoff_db = 9.0;
};

enum class EnforceAction { None, McsRaised, LReduced, NReduced, PowerReduced, Dropped };

std::string to_string(EnforceAction a);

/// Runs the mitigation pipeline until the projected CR (a function of the
/// knobs, supplied by the caller) falls within the limit for the measured
/// CBR; marks the transmission dropped when every step is exhausted.
EnforceAction enforce(const std::function<double(const TxKnobs&)>& projected_cr, double cbr,
                      int priority, const CongestionTable& table, TxKnobs& knobs,
                      const EnforceLimits& limits);

}  // namespace nrv2x
