#include "edgesched/workload/trace.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"

namespace edgesched {

namespace {

constexpr std::array<const char*, 8> kFields = {
    "timestamp",    "cpu_cores_requested", "cpu_usage_mips", "ram_mb",
    "net_rx_mbps",  "net_tx_mbps",         "disk_read_mbps", "disk_write_mbps"};

double& field_ref(TraceRecord& r, std::size_t i) {
  switch (i) {
    case 0: return r.timestamp;
    case 1: return r.cpu_cores_requested;
    case 2: return r.cpu_usage_mips;
    case 3: return r.ram_mb;
    case 4: return r.net_rx_mbps;
    case 5: return r.net_tx_mbps;
    case 6: return r.disk_read_mbps;
    default: return r.disk_write_mbps;
  }
}

// FNV-1a, 64 bit.
std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TraceSet parse_trace(std::istream& in, const std::string& default_id) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<char> delim;
  std::array<std::size_t, kFields.size()> column{};
  std::optional<std::size_t> id_column;
  std::size_t width = 0;
  TraceSet out;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (!delim) {
      delim = t.find(';') != std::string::npos ? ';' : ',';
      const auto names = text::split(t, *delim);
      width = names.size();
      for (std::size_t f = 0; f < kFields.size(); ++f) {
        const auto it = std::find(names.begin(), names.end(), kFields[f]);
        if (it == names.end()) {
          throw ParseError(std::string("trace header is missing column '") + kFields[f] + "'");
        }
        column[f] = static_cast<std::size_t>(it - names.begin());
      }
      const auto id_it = std::find(names.begin(), names.end(), "trace_id");
      if (id_it != names.end()) id_column = static_cast<std::size_t>(id_it - names.begin());
      continue;
    }
    const auto cells = text::split(t, *delim);
    const std::string where = "trace row " + std::to_string(line_no);
    if (cells.size() != width) {
      throw ParseError(where + ": expected " + std::to_string(width) + " fields, got " +
                       std::to_string(cells.size()));
    }
    TraceRecord rec;
    for (std::size_t f = 0; f < kFields.size(); ++f) {
      const double v = text::parse_double(cells[column[f]], where);
      if (v < 0.0) throw ValidationError(where + ": negative " + kFields[f]);
      field_ref(rec, f) = v;
    }
    const std::string id = id_column ? cells[*id_column] : default_id;
    out[id].push_back(rec);
  }
  for (auto& [id, stream] : out) {
    std::stable_sort(stream.begin(), stream.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return out;
}

TraceSet load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  return parse_trace(in, path.stem().string());
}

TraceSet load_trace_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("trace directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".txt")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TraceSet all;
  for (const auto& f : files) {
    for (auto& [id, stream] : load_trace(f)) {
      auto& dst = all[id];
      dst.insert(dst.end(), stream.begin(), stream.end());
    }
  }
  return all;
}

void write_trace(std::ostream& out, const TraceStream& stream) {
  for (std::size_t f = 0; f < kFields.size(); ++f) out << (f ? "," : "") << kFields[f];
  out << '\n';
  for (const auto& r : stream) {
    TraceRecord copy = r;
    for (std::size_t f = 0; f < kFields.size(); ++f) {
      out << (f ? "," : "") << text::format_double(field_ref(copy, f));
    }
    out << '\n';
  }
}

bool is_training_trace(const std::string& id, double train_fraction) {
  return static_cast<double>(hash_id(id) % 10000) < train_fraction * 10000.0;
}

TracePartition split_traces(const TraceSet& traces, double train_fraction) {
  TracePartition p;
  for (const auto& [id, stream] : traces) {
    (is_training_trace(id, train_fraction) ? p.train : p.test).push_back(id);
  }
  return p;
}

}  // namespace edgesched
