#include "nrv2x/channel.hpp"

#include <algorithm>
#include <cmath>

namespace nrv2x {

double los_probability(ScenarioKind scenario, double distance_m) {
    const double d = distance_m;
    if (scenario == ScenarioKind::Highway) {
        if (d <= 475.0) {
            const double p = 2.1013e-6 * d * d - 0.002 * d + 1.01093;
            return std::min(1.0, p);
        }
        return std::max(0.0, 0.54 - 0.001 * (d - 475.0));
    }
    return std::clamp(1.05 * std::exp(-0.0114 * d), 0.0, 1.0);
}

double pathloss_db(LinkState state, double d3d_m, double fc_ghz, ScenarioKind scenario) {
    if (d3d_m <= 0.0) throw std::invalid_argument("pathloss_db: distance must be positive");
    const double ld = std::log10(d3d_m);
    const double lf = std::log10(fc_ghz);
    if (state == LinkState::Nlos) return 36.85 + 30.0 * ld + 18.9 * lf;
    if (scenario == ScenarioKind::Highway) return 32.4 + 20.0 * ld + 20.0 * lf;
    return 38.77 + 16.7 * ld + 18.2 * lf;
}

double blockage_loss_db(const BlockageModel& model, double tx_h, double rx_h,
                        double blocker_h, double distance_m, RngStream& rng) {
    const double lo = std::min(tx_h, rx_h);
    const double hi = std::max(tx_h, rx_h);
    if (lo > blocker_h) return 0.0;
    const double ld = std::log10(std::max(distance_m, 1.0));
    double mean, sigma;
    if (hi <= blocker_h) {
        mean = model.below_mean_base + std::max(0.0, model.below_mean_coef * ld - model.below_mean_floor);
        sigma = model.below_sigma;
    } else {
        mean = model.mixed_mean_base + std::max(0.0, model.mixed_mean_coef * ld - model.mixed_mean_floor);
        sigma = model.mixed_sigma;
    }
    return rng.gaussian(mean, sigma);
}

double ShadowFading::advance(double displacement_m, LinkState state) {
    if (!initialized_) {
        unit_ = rng_.gaussian(0.0, 1.0);
        initialized_ = true;
    } else if (displacement_m > 0.0) {
        const double rho = std::exp(-displacement_m / d_corr_);
        unit_ = rho * unit_ + std::sqrt(1.0 - rho * rho) * rng_.gaussian(0.0, 1.0);
    }
    return sigma_for(state) * unit_;
}

LinkProcess::LinkProcess(std::uint64_t master_seed, UeId tx, UeId rx, const ChannelModel& model)
    : state_rng_(master_seed, "channel/state", tx, rx),
      shadow_(RngStream(master_seed, "channel/shadow", tx, rx), model.shadow_decorrelation_m) {}

LinkRealization LinkProcess::realize(const ChannelModel& model, const LinkGeometry& geom) {
    LinkRealization out;
    const double d2d = (geom.tx_pos - geom.rx_pos).norm();
    out.distance_3d_m = std::max(
        distance_3d(geom.tx_pos, geom.tx_height, geom.rx_pos, geom.rx_height), 0.1);

    const long bin = std::lround(std::floor(d2d));  // 1 m granularity
    const bool resample = !distance_bin_ || *distance_bin_ != bin;

    if (!geom.same_street) {
        state_ = LinkState::Nlos;
        blockage_db_ = 0.0;
    } else if (model.geometric_blockers) {
        if (geom.blocker_height) {
            state_ = LinkState::Nlosv;
            if (resample)
                blockage_db_ = blockage_loss_db(model.blockage, geom.tx_height, geom.rx_height,
                                                *geom.blocker_height, d2d, state_rng_);
        } else {
            state_ = LinkState::Los;
            blockage_db_ = 0.0;
        }
    } else if (resample) {
        const double p = los_probability(model.scenario, d2d);
        state_ = state_rng_.uniform() < p ? LinkState::Los : LinkState::Nlosv;
        blockage_db_ = 0.0;
        if (state_ == LinkState::Nlosv)
            blockage_db_ = blockage_loss_db(model.blockage, geom.tx_height, geom.rx_height,
                                            model.default_blocker_height_m, d2d, state_rng_);
    }
    if (resample) distance_bin_ = bin;

    double displacement = 0.0;
    if (has_last_pos_)
        displacement = (geom.tx_pos - last_tx_pos_).norm() + (geom.rx_pos - last_rx_pos_).norm();
    last_tx_pos_ = geom.tx_pos;
    last_rx_pos_ = geom.rx_pos;
    has_last_pos_ = true;

    out.state = state_;
    out.pathloss_db = pathloss_db(state_, out.distance_3d_m, model.carrier_ghz, model.scenario);
    out.blockage_db = state_ == LinkState::Nlosv ? blockage_db_ : 0.0;
    out.shadow_db = shadow_.advance(displacement, state_) + model.fading_margin_db;
    return out;
}

namespace {

Vec3 spherical_unit(double zenith, double azimuth) {
    return {std::sin(zenith) * std::cos(azimuth), std::sin(zenith) * std::sin(azimuth),
            std::cos(zenith)};
}

}  // namespace

double doppler_hz(const DopplerGeometry& geom, DopplerPath path) {
    const Vec3 v_rx = spherical_unit(geom.rx_elevation, geom.rx_azimuth) * geom.rx_speed_mps;
    const Vec3 v_tx = spherical_unit(geom.tx_elevation, geom.tx_azimuth) * geom.tx_speed_mps;
    const Vec3 r_rx = spherical_unit(geom.zoa, geom.aoa);
    const Vec3 r_tx = spherical_unit(geom.zod, geom.aod);
    double num = r_rx.dot(v_rx) + r_tx.dot(v_tx);
    if (path == DopplerPath::Scattered)
        num += 2.0 * geom.scatterer_alpha * geom.scatterer_speed_mps;
    return num / geom.wavelength_m;
}

}  // namespace nrv2x
