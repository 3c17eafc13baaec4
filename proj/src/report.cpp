#include "weakdesc/report.hpp"

#include <cstdio>
#include <sstream>

namespace weakdesc::harness {

nlohmann::ordered_json to_json(const TrialResult& r) {
  const BenchConfig& c = r.config;
  nlohmann::ordered_json j;
  j["provider"] = to_string(c.provider);
  j["threads"] = c.threads;
  j["size"] = c.size;
  j["k"] = c.k;
  j["ms"] = c.duration_ms;
  j["seq_bits"] = c.seq_bits;
  j["seed"] = c.seed;
  j["ops"] = r.ops;
  j["successes"] = r.successes;
  j["throughput_ops_per_us"] = r.throughput_ops_per_us;
  j["checksum_ok"] = r.checksum_ok;
  j["footprint_bytes"] = r.footprint_bytes;
  j["error_kind"] = to_string(r.error_kind);
  j["flagged_cells"] = r.flagged_cells;
  j["canary_hits"] = r.canary_hits;
  return j;
}

nlohmann::ordered_json to_json(const WraparoundSummary& s) {
  nlohmann::ordered_json j;
  j["seq_bits"] = s.seq_bits;
  j["trials"] = s.trials;
  j["checksum_errors"] = s.checksum_errors;
  j["livelocks"] = s.livelocks;
  j["faults"] = s.faults;
  j["failure_fraction"] = s.failure_fraction();
  return j;
}

std::string csv_header() {
  return "provider,threads,size,k,ms,seq_bits,seed,ops,successes,throughput_ops_per_us,"
         "checksum_ok,footprint_bytes,error_kind,flagged_cells,canary_hits";
}

std::string csv_row(const TrialResult& r) {
  const BenchConfig& c = r.config;
  char tp[32];
  std::snprintf(tp, sizeof tp, "%.6f", r.throughput_ops_per_us);
  std::ostringstream out;
  out << to_string(c.provider) << ',' << c.threads << ',' << c.size << ',' << c.k << ','
      << c.duration_ms << ',' << c.seq_bits << ',' << c.seed << ',' << r.ops << ','
      << r.successes << ',' << tp << ',' << (r.checksum_ok ? "true" : "false") << ','
      << r.footprint_bytes << ',' << to_string(r.error_kind) << ',' << r.flagged_cells << ','
      << r.canary_hits;
  return out.str();
}

std::string wraparound_csv_header() {
  return "seq_bits,trials,checksum_errors,livelocks,faults,failure_fraction";
}

std::string wraparound_csv_row(const WraparoundSummary& s) {
  char frac[32];
  std::snprintf(frac, sizeof frac, "%.4f", s.failure_fraction());
  std::ostringstream out;
  out << s.seq_bits << ',' << s.trials << ',' << s.checksum_errors << ',' << s.livelocks << ','
      << s.faults << ',' << frac;
  return out.str();
}

}  // namespace weakdesc::harness
