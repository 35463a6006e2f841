#pragma once

#include <optional>
#include <stdexcept>

#include "nrv2x/core.hpp"
#include "nrv2x/rng.hpp"

namespace nrv2x {

enum class ScenarioKind { Highway, UrbanGrid };
enum class LinkState { Los, Nlos, Nlosv };

/// Large-scale state of one TX->RX link in one slot.
struct LinkRealization {
    LinkState state = LinkState::Los;
    double pathloss_db = 0.0;
    double blockage_db = 0.0;  // nonzero only under NLOSv
    double shadow_db = 0.0;
    double distance_3d_m = 0.0;

    double total_loss_db() const { return pathloss_db + blockage_db + shadow_db; }
};

/// P(LOS) for same-street pairs. Highway: quadratic up to 475 m, linear decay
/// beyond; urban: clamped exponential.
double los_probability(ScenarioKind scenario, double distance_m);

/// Pathloss in dB. LOS and NLOSv share one expression per scenario; NLOS is
/// scenario-independent. Distance is 3D in meters, carrier in GHz.
double pathloss_db(LinkState state, double d3d_m, double fc_ghz, ScenarioKind scenario);

/// Vehicle blockage loss model for NLOSv links: a normal draw in dB whose
/// parameters depend on how the antenna heights relate to the blocker height.
struct BlockageModel {
    // both antennas at or below the blocker
    double below_mean_base = 9.0;
    double below_mean_coef = 15.0;   // * log10(d)
    double below_mean_floor = 41.0;  // mean += max(0, coef*log10(d) - floor)
    double below_sigma = 4.5;
    // one antenna above, one at or below
    double mixed_mean_base = 5.0;
    double mixed_mean_coef = 12.0;
    double mixed_mean_floor = 32.0;
    double mixed_sigma = 4.0;
};

double blockage_loss_db(const BlockageModel& model, double tx_h, double rx_h,
                        double blocker_h, double distance_m, RngStream& rng);

/// Per-link lognormal shadow fading (normal in dB), exponentially
/// decorrelated along the combined displacement of both endpoints.
/// One process per ordered UE pair; sigma switches with the link state.
class ShadowFading {
  public:
    ShadowFading() = default;
    ShadowFading(RngStream rng, double decorrelation_distance_m)
        : rng_(rng), d_corr_(decorrelation_distance_m) {}

    /// Value in dB after moving `displacement_m` since the previous call.
    /// Zero displacement returns the held value unchanged.
    double advance(double displacement_m, LinkState state);

  private:
    static double sigma_for(LinkState s) { return s == LinkState::Nlos ? 4.0 : 3.0; }

    RngStream rng_;
    double d_corr_ = 25.0;
    double unit_ = 0.0;  // N(0,1)-scaled process, multiplied by sigma on read
    bool initialized_ = false;
};

/// Scenario-level channel parameters shared by all links.
struct ChannelModel {
    ScenarioKind scenario = ScenarioKind::Highway;
    double carrier_ghz = 6.0;
    BlockageModel blockage;
    double shadow_decorrelation_m = 25.0;
    double default_blocker_height_m = 1.6;  // probabilistic NLOSv mode
    bool geometric_blockers = false;        // detect blockers from vehicle footprints
    double fading_margin_db = 0.0;          // optional fixed margin added to total loss
};

/// Geometry inputs for one link realization, resolved by the caller
/// (positions, antenna heights, street relation, optional geometric blocker).
struct LinkGeometry {
    Vec2 tx_pos;
    double tx_height = 1.6;
    Vec2 rx_pos;
    double rx_height = 1.6;
    bool same_street = true;                 // always true on highway
    std::optional<double> blocker_height;    // tallest blocker, geometric mode
};

/// Holds the per-link memory: LOS state (re-sampled only when the 1 m
/// distance bin changes), the NLOSv blockage draw, and the shadow process.
class LinkProcess {
  public:
    LinkProcess() = default;
    LinkProcess(std::uint64_t master_seed, UeId tx, UeId rx, const ChannelModel& model);

    LinkRealization realize(const ChannelModel& model, const LinkGeometry& geom);

  private:
    RngStream state_rng_;
    ShadowFading shadow_;
    std::optional<long> distance_bin_;
    LinkState state_ = LinkState::Los;
    double blockage_db_ = 0.0;
    Vec2 last_tx_pos_, last_rx_pos_;
    bool has_last_pos_ = false;
};

/// Dual-mobility Doppler geometry: endpoint velocities in spherical form,
/// one ray's arrival/departure angles, and the scatterer mobility terms.
/// Angles in radians; elevation theta measured from zenith.
struct DopplerGeometry {
    double tx_speed_mps = 0.0;
    double tx_azimuth = 0.0;
    double tx_elevation = 1.5707963267948966;  // horizontal travel
    double rx_speed_mps = 0.0;
    double rx_azimuth = 0.0;
    double rx_elevation = 1.5707963267948966;
    double aoa = 0.0;  // azimuth of arrival
    double zoa = 1.5707963267948966;
    double aod = 0.0;  // azimuth of departure
    double zod = 1.5707963267948966;
    double wavelength_m = kSpeedOfLightMps / 6.0e9;
    double scatterer_alpha = 0.0;      // fraction of mobile scatterers, [0,1]
    double scatterer_speed_mps = 0.0;  // draw in [-v_scatt, v_scatt]
};

enum class DopplerPath { Los, Scattered };

/// Doppler shift in Hz: projection of both endpoint velocities on the ray's
/// arrival/departure unit vectors, plus 2*alpha*D for scattered paths.
double doppler_hz(const DopplerGeometry& geom, DopplerPath path);

}  // namespace nrv2x
