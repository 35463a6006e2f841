#include "nrv2x/trace.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nrv2x {

std::string format_fixed(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

CsvTraceWriter::CsvTraceWriter(const std::string& trace_path, const std::string& cbr_path)
    : trace_(trace_path), cbr_(cbr_path) {
    if (!trace_) throw std::runtime_error("trace: cannot open " + trace_path);
    if (!cbr_) throw std::runtime_error("trace: cannot open " + cbr_path);
    trace_ << trace_header() << '\n';
    cbr_ << cbr_header() << '\n';
}

CsvTraceWriter::~CsvTraceWriter() = default;

std::string CsvTraceWriter::trace_header() {
    return "kind,slot,tx,rx,packet_id,attempt,gen_slot,pdb_slots,size_bytes,priority,"
           "pool_slot,subchannel,l_pssch,mcs,tx_power_dbm,rsrp_dbm,sinr_db,sci_decoded,"
           "tb_decoded,distance_m,dist_first_tx_m,link_state,total_loss_db,event,resources,"
           "rri_ms,counter,reason,reference,level,slss_id";
}

std::string CsvTraceWriter::cbr_header() { return "slot,ue,cbr,cr,limit,action"; }

void CsvTraceWriter::on_rx(const RxTraceRow& r) {
    trace_ << "rx," << r.slot << ',' << r.tx << ',' << r.rx << ',' << r.packet_id << ','
           << r.attempt << ',' << r.gen_slot << ',' << r.pdb_slots << ',' << r.size_bytes << ','
           << r.priority << ',' << r.pool_slot << ',' << r.subchannel << ',' << r.l_pssch << ','
           << r.mcs << ',' << format_fixed(r.tx_power_dbm) << ',' << format_fixed(r.rsrp_dbm)
           << ',' << format_fixed(r.sinr_db) << ',' << (r.sci_decoded ? 1 : 0) << ','
           << (r.tb_decoded ? 1 : 0) << ',' << format_fixed(r.distance_m) << ','
           << format_fixed(r.dist_first_tx_m) << ',' << r.link_state << ','
           << format_fixed(r.total_loss_db) << ",,,,,,,,\n";
}

void CsvTraceWriter::on_mac(const MacTraceRow& r) {
    trace_ << "mac," << r.slot << ',' << r.ue << ",,,,,,,,,,,,,,,,,,,,," << r.event << ','
           << r.resources << ',' << r.rri_ms << ',' << r.counter << ',' << r.reason << ",,,\n";
}

void CsvTraceWriter::on_sync(const SyncTraceRow& r) {
    trace_ << "sync," << r.slot << ',' << r.ue << ",,,,,,,,,,,,,,,,,,,,,,,,,," << r.reference
           << ',' << r.level << ',' << r.slss_id << '\n';
}

void CsvTraceWriter::on_cbr(const CbrTraceRow& r) {
    cbr_ << r.slot << ',' << r.ue << ',' << format_fixed(r.cbr) << ',' << format_fixed(r.cr)
         << ',' << format_fixed(r.limit) << ',' << r.action << '\n';
}

}  // namespace nrv2x
