#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>

#include "nrv2x/config.hpp"
#include "nrv2x/mac_mode2.hpp"
#include "nrv2x/metrics.hpp"
#include "nrv2x/trace.hpp"

namespace nrv2x {

struct RunResult {
    std::vector<PacketRecord> records;
    std::vector<std::pair<double, double>> cbr_cr_samples;  // post-warmup (cbr, cr)
    MetricsSummary summary;
    long slots_simulated = 0;
};

/// Slot-stepped simulation: mobility, traffic, synchronization, mode-2 MAC,
/// channel + reception with half-duplex, PSFCH feedback, metrics. Trace rows
/// stream to the sink as they are produced; the summary is a pure function
/// of the packet records and CBR samples.
class SimEngine {
  public:
    explicit SimEngine(SimConfig cfg);
    ~SimEngine();

    RunResult run(TraceSink& sink);

    /// Vehicles after dropping (exposed for tests).
    const std::vector<Vehicle>& vehicles() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// CLI entry: run the engine and write trace.csv, summary.json and
/// cbr_timeseries.csv into out_dir. Returns the process exit status.
int run_and_emit(const SimConfig& cfg, const std::string& out_dir);

}  // namespace nrv2x
