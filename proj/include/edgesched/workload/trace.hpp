#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "edgesched/core/model.hpp"

namespace edgesched {

/// One sample of a VM resource-usage trace (five-minute resolution).
struct TraceRecord {
  double timestamp = 0.0;  // seconds
  double cpu_cores_requested = 0.0;
  double cpu_usage_mips = 0.0;
  double ram_mb = 0.0;
  double net_rx_mbps = 0.0;
  double net_tx_mbps = 0.0;
  double disk_read_mbps = 0.0;
  double disk_write_mbps = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;

  Resources to_demand() const {
    return {cpu_usage_mips, ram_mb, net_rx_mbps + net_tx_mbps, disk_read_mbps + disk_write_mbps};
  }
};

using TraceStream = std::vector<TraceRecord>;
using TraceSet = std::map<std::string, TraceStream>;

/// Parses delimiter-separated trace text (',' or ';', detected from the header).
/// The header names the eight TraceRecord fields in any order; an optional
/// `trace_id` column splits the file into several streams, otherwise every row
/// belongs to `default_id`. Streams come back sorted by timestamp.
TraceSet parse_trace(std::istream& in, const std::string& default_id);

/// Loads one trace file; the stream id defaults to the file stem.
TraceSet load_trace(const std::filesystem::path& path);

/// Loads every *.csv / *.txt file in a directory.
TraceSet load_trace_dir(const std::filesystem::path& dir);

void write_trace(std::ostream& out, const TraceStream& stream);

/// Deterministic 75/25 split by a hash of the trace id.
bool is_training_trace(const std::string& id, double train_fraction = 0.75);

struct TracePartition {
  std::vector<std::string> train;
  std::vector<std::string> test;
};
TracePartition split_traces(const TraceSet& traces, double train_fraction = 0.75);

}  // namespace edgesched
