#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "edgesched/core/errors.hpp"
#include "edgesched/core/text.hpp"
#include "edgesched/nn/nn.hpp"

namespace edgesched::nn {

namespace {

constexpr int kCheckpointVersion = 1;

// Layout:
//   edgesched-params <version> <kind>
//   meta <key> <int>          (zero or more)
//   tensor <name> <rows> <cols>
//   <rows lines of cols values>
//   end
void write_header(std::ostream& out, const std::string& kind, const std::map<std::string, long long>& meta) {
  out << "edgesched-params " << kCheckpointVersion << ' ' << kind << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
}

template <class Refs>
void write_tensors(std::ostream& out, const Refs& tensors) {
  for (const auto& t : tensors) {
    const Eigen::MatrixXd& m = *t.value;
    out << "tensor " << t.name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        out << text::format_double(m(r, c));
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw ParseError("failed writing checkpoint");
}

struct Header {
  std::string kind;
  std::map<std::string, long long> meta;
};

Header read_header(std::istream& in) {
  std::string magic, kind;
  int version = 0;
  if (!(in >> magic >> version >> kind) || magic != "edgesched-params") {
    throw ParseError("not a parameter checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Header h{kind, {}};
  while (in >> std::ws && in.peek() == 'm') {
    std::string word, key;
    long long v = 0;
    if (!(in >> word >> key >> v) || word != "meta") throw ParseError("malformed checkpoint meta line");
    h.meta[key] = v;
  }
  return h;
}

long long meta_at(const Header& h, const std::string& key) {
  const auto it = h.meta.find(key);
  if (it == h.meta.end()) throw ParseError("checkpoint lacks meta " + key);
  return it->second;
}

template <class Refs>
void read_tensors(std::istream& in, Refs tensors) {
  for (auto& t : tensors) {
    std::string word, name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "tensor") {
      throw ParseError("malformed checkpoint tensor header before " + t.name);
    }
    if (name != t.name || rows != t.value->rows() || cols != t.value->cols()) {
      throw ParseError("checkpoint tensor " + name + " does not match expected " + t.name);
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        std::string tok;
        if (!(in >> tok)) throw ParseError("truncated checkpoint tensor " + name);
        (*t.value)(r, c) = text::parse_double(tok, "checkpoint value");
      }
    }
  }
  std::string end;
  if (!(in >> end) || end != "end") throw ParseError("checkpoint has trailing or missing data");
}

template <class P>
void save_to(const std::filesystem::path& path, const P& p) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  save_params(out, p);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  return in;
}

}  // namespace

void save_params(std::ostream& out, const R2N2Params& p) {
  write_header(out, "r2n2",
               {{"hidden", p.hidden}, {"hosts", p.shape.hosts}, {"max_tasks", p.shape.max_tasks}});
  write_tensors(out, p.tensors());
}

R2N2Params load_r2n2(std::istream& in) {
  const Header h = read_header(in);
  if (h.kind != "r2n2") throw ParseError("checkpoint holds " + h.kind + ", expected r2n2");
  StateShape shape{static_cast<int>(meta_at(h, "max_tasks")), static_cast<int>(meta_at(h, "hosts"))};
  R2N2Params p = R2N2Params::zeros(shape, static_cast<int>(meta_at(h, "hidden")));
  read_tensors(in, p.tensors());
  return p;
}

void save_params(std::ostream& out, const MlpParams& p) {
  std::map<std::string, long long> meta{{"layers", static_cast<long long>(p.layers.size())}};
  meta["width0"] = p.input_size();
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    meta["width" + std::to_string(i + 1)] = p.layers[i].W.rows();
  }
  write_header(out, "mlp", meta);
  write_tensors(out, p.tensors());
}

MlpParams load_mlp(std::istream& in) {
  const Header h = read_header(in);
  if (h.kind != "mlp") throw ParseError("checkpoint holds " + h.kind + ", expected mlp");
  const long long layers = meta_at(h, "layers");
  if (layers < 1) throw ParseError("checkpoint has no layers");
  MlpParams p;
  for (long long i = 0; i < layers; ++i) {
    p.layers.push_back(Dense::zeros(static_cast<int>(meta_at(h, "width" + std::to_string(i))),
                                    static_cast<int>(meta_at(h, "width" + std::to_string(i + 1)))));
  }
  read_tensors(in, p.tensors());
  return p;
}

void save_params(const std::filesystem::path& path, const R2N2Params& p) { save_to(path, p); }
void save_params(const std::filesystem::path& path, const MlpParams& p) { save_to(path, p); }

R2N2Params load_r2n2(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_r2n2(in);
}

MlpParams load_mlp(const std::filesystem::path& path) {
  auto in = open_in(path);
  return load_mlp(in);
}

}  // namespace edgesched::nn
