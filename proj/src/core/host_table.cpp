#include "edgesched/core/host_table.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"

namespace edgesched {

namespace {

HostType make_type(std::string name, Layer layer, int cores, double mips, double ram_gb,
                   double net_gbps, double disk_mbps, double cost,
                   std::array<double, kPowerPoints> power) {
  HostType t;
  t.prototype.name = std::move(name);
  t.prototype.layer = layer;
  t.prototype.cores = cores;
  t.prototype.capacity = {mips, ram_gb * 1024.0, net_gbps * 1000.0, disk_mbps};
  t.prototype.cost_rate = cost;
  t.prototype.response_time = layer == Layer::Edge ? 0.001 : 0.010;
  t.prototype.power_curve = power;
  return t;
}

const char* const kColumns[] = {"name",          "layer",         "count",
                                "cores",         "mips",          "ram_mb",
                                "net_bw_mbps",   "disk_bw_mbps",  "cost_rate",
                                "response_time", "energy_weight"};
constexpr std::size_t kFixedColumns = std::size(kColumns);

}  // namespace

std::vector<HostType> reference_host_types() {
  return {
      make_type("Hitachi HA 8000", Layer::Edge, 2, 1800, 8, 0.1, 76, 0.11,
                {24.3, 30.4, 33.7, 36.6, 39.6, 42.2, 45.6, 51.8, 55.7, 60.8, 63.2}),
      make_type("DEPO Race X340H", Layer::Edge, 4, 2000, 16, 1.0, 49, 0.23,
                {83.2, 88.2, 94.3, 101, 107, 112, 117, 120, 124, 128, 131}),
      make_type("Dell PowerEdge R820", Layer::Cloud, 32, 2000, 48, 1.0, 49, 3.47,
                {110, 149, 167, 188, 218, 237, 268, 307, 358, 414, 446}),
      make_type("Dell PowerEdge C6320", Layer::Cloud, 64, 2660, 64, 1.5, 1024, 6.94,
                {210, 371, 449, 522, 589, 647, 705, 802, 924, 1071, 1229}),
  };
}

std::vector<Host> instantiate_hosts(const std::vector<HostType>& types) {
  std::vector<Host> hosts;
  for (const auto& t : types) {
    for (int k = 0; k < t.count; ++k) {
      Host h = t.prototype;
      h.id = static_cast<HostId>(hosts.size());
      hosts.push_back(std::move(h));
    }
  }
  return hosts;
}

std::vector<Host> desk_cluster() {
  auto types = reference_host_types();
  for (auto& t : types) t.count = 2;
  return instantiate_hosts(types);
}

std::vector<Host> full_cluster() {
  auto types = reference_host_types();
  for (auto& t : types) t.count = 25;
  return instantiate_hosts(types);
}

std::vector<HostType> parse_host_table(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<HostType> types;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = text::split(t, ',');
    if (!header_seen) {
      if (cells.size() != kFixedColumns + kPowerPoints) {
        throw ParseError("host table header must have " +
                         std::to_string(kFixedColumns + kPowerPoints) + " columns");
      }
      for (std::size_t c = 0; c < kFixedColumns; ++c) {
        if (cells[c] != kColumns[c]) {
          throw ParseError("host table header column " + std::to_string(c + 1) +
                           " must be '" + kColumns[c] + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != kFixedColumns + kPowerPoints) {
      throw ParseError("host table line " + std::to_string(line_no) + ": expected " +
                       std::to_string(kFixedColumns + kPowerPoints) + " fields");
    }
    const std::string where = "host table line " + std::to_string(line_no);
    HostType ht;
    Host& h = ht.prototype;
    h.name = cells[0];
    h.layer = parse_layer(cells[1]);
    ht.count = static_cast<int>(text::parse_int(cells[2], where));
    h.cores = static_cast<int>(text::parse_int(cells[3], where));
    h.capacity.cpu_mips = text::parse_double(cells[4], where);
    h.capacity.ram_mb = text::parse_double(cells[5], where);
    h.capacity.net_bw_mbps = text::parse_double(cells[6], where);
    h.capacity.disk_bw_mbps = text::parse_double(cells[7], where);
    h.cost_rate = text::parse_double(cells[8], where);
    h.response_time = text::parse_double(cells[9], where);
    h.energy_weight = text::parse_double(cells[10], where);
    for (std::size_t p = 0; p < kPowerPoints; ++p) {
      h.power_curve[p] = text::parse_double(cells[kFixedColumns + p], where);
    }
    if (ht.count < 0) throw ValidationError(where + ": negative count");
    h.validate();
    types.push_back(std::move(ht));
  }
  if (!header_seen) throw ParseError("host table is missing its header row");
  return types;
}

std::vector<HostType> load_host_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open host table " + path.string());
  return parse_host_table(in);
}

void write_host_table(std::ostream& out, const std::vector<HostType>& types) {
  for (std::size_t c = 0; c < kFixedColumns; ++c) out << (c ? "," : "") << kColumns[c];
  for (std::size_t p = 0; p < kPowerPoints; ++p) out << ",p" << p * 10;
  out << '\n';
  for (const auto& t : types) {
    const Host& h = t.prototype;
    out << h.name << ',' << to_string(h.layer) << ',' << t.count << ',' << h.cores << ','
        << text::format_double(h.capacity.cpu_mips) << ','
        << text::format_double(h.capacity.ram_mb) << ','
        << text::format_double(h.capacity.net_bw_mbps) << ','
        << text::format_double(h.capacity.disk_bw_mbps) << ','
        << text::format_double(h.cost_rate) << ',' << text::format_double(h.response_time)
        << ',' << text::format_double(h.energy_weight);
    for (double p : h.power_curve) out << ',' << text::format_double(p);
    out << '\n';
  }
}

}  // namespace edgesched
