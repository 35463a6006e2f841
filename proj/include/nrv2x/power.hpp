#pragma once

#include <optional>
#include <stdexcept>
#include <utility>

#include "nrv2x/core.hpp"

namespace nrv2x {

/// Open-loop sidelink power control parameters. The DL-pathloss and
/// SL-pathloss terms are enabled independently; SL-pathloss applies to
/// unicast only (enforced by the caller's configuration validation).
struct PowerConfig {
    double p_max_dbm = 23.0;
    bool use_dl_pathloss = false;
    double p0_dl_dbm = -90.0;
    double alpha_dl = 1.0;
    bool use_sl_pathloss = false;
    double p0_sl_dbm = -90.0;
    double alpha_sl = 1.0;
    double p0_psfch_dbm = -100.0;
    double alpha_psfch = 1.0;
    double p0_sssb_dbm = -100.0;
    double alpha_sssb = 1.0;
};

/// SL pathloss estimate from the receiver's averaged RSRP report.
inline double sl_pathloss_db(double avg_tx_power_dmrs_dbm, double avg_rsrp_dbm) {
    return avg_tx_power_dmrs_dbm - avg_rsrp_dbm;
}

/// PSSCH power over M_PSSCH PRBs (symbols without PSCCH): min of P_MAX and
/// each enabled fractional-compensation term. With both terms disabled the
/// result is P_MAX.
double pssch_power_dbm(const PowerConfig& cfg, int mu, int m_pssch_prbs,
                       std::optional<double> pl_dl_db, std::optional<double> pl_sl_db);

/// Splits P_PSSCH,1 across the PSCCH/PSSCH symbols at equal PSD:
/// returns (P_PSSCH,2, P_PSCCH); their linear sum equals P_PSSCH,1.
std::pair<double, double> split_pscch_pssch(double p_pssch1_dbm, int m_pssch_prbs,
                                            int m_pscch_prbs);

/// PSFCH power: one-PRB bandwidth factor in coverage, P_MAX otherwise.
double psfch_power_dbm(const PowerConfig& cfg, int mu, std::optional<double> pl_dl_db,
                       bool in_coverage);

/// S-SSB power: 11-RB bandwidth factor in coverage, P_MAX otherwise.
double sssb_power_dbm(const PowerConfig& cfg, int mu, std::optional<double> pl_dl_db,
                      bool in_coverage);

/// Equal power split across k simultaneous PSFCH transmissions.
inline double psfch_share_dbm(double total_dbm, int k) {
    if (k < 1) throw std::invalid_argument("psfch_share_dbm: k must be >= 1");
    return total_dbm - 10.0 * std::log10(static_cast<double>(k));
}

/// Exponential moving average of RSRP reports, used to derive the SL
/// pathloss fed back to the transmitter.
class RsrpAverager {
  public:
    explicit RsrpAverager(double coefficient = 0.5) : coef_(coefficient) {}

    double update(double rsrp_dbm) {
        if (!has_value_) {
            value_ = rsrp_dbm;
            has_value_ = true;
        } else {
            value_ = coef_ * rsrp_dbm + (1.0 - coef_) * value_;
        }
        return value_;
    }
    bool has_value() const { return has_value_; }
    double value() const { return value_; }

  private:
    double coef_;
    double value_ = 0.0;
    bool has_value_ = false;
};

}  // namespace nrv2x
