#include "nrv2x/power.hpp"

#include <algorithm>
#include <cmath>

namespace nrv2x {

double pssch_power_dbm(const PowerConfig& cfg, int mu, int m_pssch_prbs,
                       std::optional<double> pl_dl_db, std::optional<double> pl_sl_db) {
    if (m_pssch_prbs <= 0) throw std::invalid_argument("pssch_power_dbm: M_PSSCH must be positive");
    const double bw = 10.0 * std::log10(static_cast<double>(1 << mu) * m_pssch_prbs);
    double p = cfg.p_max_dbm;
    if (cfg.use_dl_pathloss && pl_dl_db)
        p = std::min(p, cfg.p0_dl_dbm + bw + cfg.alpha_dl * *pl_dl_db);
    if (cfg.use_sl_pathloss && pl_sl_db)
        p = std::min(p, cfg.p0_sl_dbm + bw + cfg.alpha_sl * *pl_sl_db);
    return p;
}

std::pair<double, double> split_pscch_pssch(double p_pssch1_dbm, int m_pssch_prbs,
                                            int m_pscch_prbs) {
    if (m_pscch_prbs <= 0 || m_pscch_prbs >= m_pssch_prbs)
        throw std::invalid_argument("split_pscch_pssch: requires 0 < M_PSCCH < M_PSSCH");
    const double m = static_cast<double>(m_pssch_prbs);
    const double mc = static_cast<double>(m_pscch_prbs);
    const double p_pssch2 = p_pssch1_dbm + 10.0 * std::log10((m - mc) / m);
    const double p_pscch = p_pssch1_dbm + 10.0 * std::log10(mc / m);
    return {p_pssch2, p_pscch};
}

double psfch_power_dbm(const PowerConfig& cfg, int mu, std::optional<double> pl_dl_db,
                       bool in_coverage) {
    if (!in_coverage || !pl_dl_db) return cfg.p_max_dbm;
    const double bw = 10.0 * std::log10(static_cast<double>(1 << mu));
    return std::min(cfg.p_max_dbm, cfg.p0_psfch_dbm + bw + cfg.alpha_psfch * *pl_dl_db);
}

double sssb_power_dbm(const PowerConfig& cfg, int mu, std::optional<double> pl_dl_db,
                      bool in_coverage) {
    if (!in_coverage || !pl_dl_db) return cfg.p_max_dbm;
    const double bw = 10.0 * std::log10(static_cast<double>(1 << mu) * 11.0);
    return std::min(cfg.p_max_dbm, cfg.p0_sssb_dbm + bw + cfg.alpha_sssb * *pl_dl_db);
}

}  // namespace nrv2x
