#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "nrv2x/core.hpp"

namespace nrv2x {

/// One reception row: TX attempt x RX pair.
struct RxTraceRow {
    Slot slot = 0;
    UeId tx = 0;
    UeId rx = 0;
    std::uint64_t packet_id = 0;
    int attempt = 0;
    Slot gen_slot = 0;
    int pdb_slots = 0;
    int size_bytes = 0;
    int priority = 0;
    Slot pool_slot = 0;
    int subchannel = 0;
    int l_pssch = 0;
    int mcs = 0;
    double tx_power_dbm = 0.0;
    double rsrp_dbm = 0.0;
    double sinr_db = 0.0;
    bool sci_decoded = false;
    bool tb_decoded = false;
    double distance_m = 0.0;
    double dist_first_tx_m = 0.0;
    int link_state = 0;  // 0 LOS, 1 NLOS, 2 NLOSv
    double total_loss_db = 0.0;
};

/// One MAC decision row.
struct MacTraceRow {
    Slot slot = 0;
    UeId ue = 0;
    std::string event;      // select, tx, reevaluate, preempt, harq_done, ...
    std::string resources;  // "slot:subch:l" triplets joined by '|'
    int rri_ms = 0;
    int counter = 0;
    std::string reason;
};

struct SyncTraceRow {
    Slot slot = 0;
    UeId ue = 0;
    std::string reference;  // gnss, gnb, syncref, internal
    int level = 8;
    int slss_id = 0;
};

struct CbrTraceRow {
    Slot slot = 0;
    UeId ue = 0;
    double cbr = 0.0;
    double cr = 0.0;
    double limit = 1.0;
    std::string action;
};

/// Receives engine events; implementations write CSV or capture in memory.
class TraceSink {
  public:
    virtual ~TraceSink() = default;
    virtual void on_rx(const RxTraceRow&) {}
    virtual void on_mac(const MacTraceRow&) {}
    virtual void on_sync(const SyncTraceRow&) {}
    virtual void on_cbr(const CbrTraceRow&) {}
};

/// Writes trace.csv (rx/mac/sync rows in one schema) and cbr_timeseries.csv
/// with fixed-precision formatting so identical runs are byte-identical.
class CsvTraceWriter : public TraceSink {
  public:
    CsvTraceWriter(const std::string& trace_path, const std::string& cbr_path);
    ~CsvTraceWriter() override;

    void on_rx(const RxTraceRow&) override;
    void on_mac(const MacTraceRow&) override;
    void on_sync(const SyncTraceRow&) override;
    void on_cbr(const CbrTraceRow&) override;

    static std::string trace_header();
    static std::string cbr_header();

  private:
    std::ofstream trace_;
    std::ofstream cbr_;
};

/// Captures rows in memory (tests, summary round-trips).
class CapturingSink : public TraceSink {
  public:
    void on_rx(const RxTraceRow& r) override { rx.push_back(r); }
    void on_mac(const MacTraceRow& r) override { mac.push_back(r); }
    void on_sync(const SyncTraceRow& r) override { sync.push_back(r); }
    void on_cbr(const CbrTraceRow& r) override { cbr.push_back(r); }

    std::vector<RxTraceRow> rx;
    std::vector<MacTraceRow> mac;
    std::vector<SyncTraceRow> sync;
    std::vector<CbrTraceRow> cbr;
};

/// Fixed 6-decimal formatting used in every CSV float field.
std::string format_fixed(double v);

}  // namespace nrv2x
