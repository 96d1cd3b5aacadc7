#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "edgesched/core/model.hpp"

namespace edgesched {

/// One row of a host table: a machine type and how many instances to create.
struct HostType {
  Host prototype;
  int count = 1;
};

/// The four machine types of the reference edge-cloud testbed.
std::vector<HostType> reference_host_types();

/// Expands host types into a host list with ids 0..n-1 in table order.
std::vector<Host> instantiate_hosts(const std::vector<HostType>& types);

/// 2 instances of each reference type (8 hosts).
std::vector<Host> desk_cluster();
/// 25 instances of each reference type (100 hosts).
std::vector<Host> full_cluster();

// Host table file: comma-separated, header row
//   name,layer,count,cores,mips,ram_mb,net_bw_mbps,disk_bw_mbps,cost_rate,
//   response_time,energy_weight,p0,p10,...,p100
std::vector<HostType> parse_host_table(std::istream& in);
std::vector<HostType> load_host_table(const std::filesystem::path& path);
void write_host_table(std::ostream& out, const std::vector<HostType>& types);

}  // namespace edgesched
