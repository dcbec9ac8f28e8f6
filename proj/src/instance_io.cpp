#include "qpalign/instance_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace qpalign::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary instance format assumes a little-endian host");

constexpr char kMagic[4] = {'Q', 'P', 'A', 'I'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open for writing: " + path.string());
  }
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_matrix(const Matrix& m) {
    out_.write(reinterpret_cast<const char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  void raw(const char* p, std::size_t len) { out_.write(p, static_cast<std::streamsize>(len)); }
  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw IoError("cannot open for reading: " + path.string());
  }
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  void get_matrix(Matrix& m) {
    in_.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    check();
  }
  void raw(char* p, std::size_t len) {
    in_.read(p, static_cast<std::streamsize>(len));
    check();
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void check() {
    if (!in_) throw IoError("truncated instance file: " + path_.string());
  }
  std::ifstream in_;
  std::filesystem::path path_;
};

// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t kMaxDim = 1u << 20;

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad number: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad integer: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return prefix.string() + suffix;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + p.string());
  return in;
}

void write_edges(const std::filesystem::path& p, const Matrix& a) {
  auto out = open_out(p);
  out << "i,j,w\n";
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != 0.0) out << i << ',' << j << ',' << fmt_double(a(i, j)) << '\n';
  if (!out) throw IoError("write failed: " + p.string());
}

void read_edges(const std::filesystem::path& p, Matrix& a) {
  auto in = open_in(p);
  std::string line;
  std::getline(in, line);
  if (line != "i,j,w") throw IoError("bad edge header in " + p.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 3) throw IoError("bad edge row in " + p.string());
    const auto i = parse_u64(f[0]), j = parse_u64(f[1]);
    if (i >= a.rows() || j >= a.cols() || i == j) throw IoError("edge index out of range in " + p.string());
    a(i, j) = a(j, i) = parse_double(f[2]);
  }
}

void write_features(const std::filesystem::path& p, const Matrix& m) {
  auto out = open_out(p);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << fmt_double(m(i, c));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + p.string());
}

void read_features(const std::filesystem::path& p, Matrix& m) {
  auto in = open_in(p);
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!std::getline(in, line)) throw IoError("too few feature rows in " + p.string());
    const auto f = m.cols() == 0 ? std::vector<std::string>{} : split(line);
    if (f.size() != m.cols()) throw IoError("bad feature row in " + p.string());
    for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = parse_double(f[c]);
  }
}

}  // namespace

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::GaussianWigner: return "gw";
    case ModelKind::ErdosRenyi: return "er";
    case ModelKind::StudentT: return "t";
  }
  return "unknown";
}

ModelKind parse_model(const std::string& name) {
  if (name == "gw" || name == "gaussian") return ModelKind::GaussianWigner;
  if (name == "er" || name == "erdos-renyi") return ModelKind::ErdosRenyi;
  if (name == "t" || name == "student-t") return ModelKind::StudentT;
  throw UsageError("unknown model '" + name + "'");
}

void write_binary(const std::filesystem::path& path, const StoredInstance& stored) {
  const auto& inst = stored.instance;
  const auto& p = stored.meta.params;
  Writer w(path);
  w.raw(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(inst.n);
  w.put<std::uint64_t>(inst.d);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.kind));
  w.put<double>(p.rho);
  w.put<double>(p.r);
  w.put<double>(p.p);
  w.put<double>(p.nu);
  w.put<std::uint64_t>(stored.meta.seed);
  w.put<std::uint8_t>(inst.truth ? 1 : 0);
  w.put_matrix(inst.a1);
  w.put_matrix(inst.a2);
  w.put_matrix(inst.x);
  w.put_matrix(inst.y);
  if (inst.truth)
    for (std::size_t v : inst.truth->map()) w.put<std::uint64_t>(v);
  w.finish(path);
}

StoredInstance read_binary(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an instance file: " + path.string());
  if (r.get<std::uint32_t>() != kVersion) throw IoError("unsupported instance version");
  StoredInstance s;
  auto& inst = s.instance;
  auto& p = s.meta.params;
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  if (n > kMaxDim || d > kMaxDim) throw IoError("implausible instance dimensions");
  const auto kind = r.get<std::uint32_t>();
  if (kind > 2) throw IoError("unknown model kind in header");
  p.kind = static_cast<ModelKind>(kind);
  p.n = inst.n = n;
  p.d = inst.d = d;
  p.rho = r.get<double>();
  p.r = r.get<double>();
  p.p = r.get<double>();
  p.nu = r.get<double>();
  s.meta.seed = r.get<std::uint64_t>();
  const auto has_truth = r.get<std::uint8_t>();
  inst.a1 = Matrix(n, n);
  inst.a2 = Matrix(n, n);
  inst.x = Matrix(n, d);
  inst.y = Matrix(n, d);
  r.get_matrix(inst.a1);
  r.get_matrix(inst.a2);
  r.get_matrix(inst.x);
  r.get_matrix(inst.y);
  if (has_truth) {
    std::vector<std::size_t> map(n);
    for (auto& v : map) v = r.get<std::uint64_t>();
    try {
      inst.truth = Permutation(std::move(map));
    } catch (const UsageError&) {
      throw IoError("stored truth is not a permutation");
    }
  }
  if (!r.at_end()) throw IoError("trailing bytes in instance file: " + path.string());
  try {
    inst.validate();
  } catch (const std::exception& e) {
    throw IoError(std::string("invalid instance: ") + e.what());
  }
  return s;
}

void write_csv(const std::filesystem::path& prefix, const StoredInstance& stored) {
  const auto& inst = stored.instance;
  const auto& p = stored.meta.params;
  {
    auto out = open_out(with_suffix(prefix, "_meta.csv"));
    out << "key,value\n"
        << "n," << inst.n << '\n'
        << "d," << inst.d << '\n'
        << "model," << model_name(p.kind) << '\n'
        << "rho," << fmt_double(p.rho) << '\n'
        << "r," << fmt_double(p.r) << '\n'
        << "p," << fmt_double(p.p) << '\n'
        << "nu," << fmt_double(p.nu) << '\n'
        << "seed," << stored.meta.seed << '\n';
  }
  write_edges(with_suffix(prefix, "_A1.csv"), inst.a1);
  write_edges(with_suffix(prefix, "_A2.csv"), inst.a2);
  write_features(with_suffix(prefix, "_X.csv"), inst.x);
  write_features(with_suffix(prefix, "_Y.csv"), inst.y);
  const auto truth_path = with_suffix(prefix, "_truth.csv");
  if (inst.truth) {
    auto out = open_out(truth_path);
    out << "i,pi\n";
    for (std::size_t i = 0; i < inst.n; ++i) out << i << ',' << (*inst.truth)(i) << '\n';
  } else {
    std::filesystem::remove(truth_path);
  }
}

StoredInstance read_csv(const std::filesystem::path& prefix) {
  std::map<std::string, std::string> meta;
  {
    auto in = open_in(with_suffix(prefix, "_meta.csv"));
    std::string line;
    std::getline(in, line);
    if (line != "key,value") throw IoError("bad meta header");
    while (std::getline(in, line)) {
      const auto f = split(line);
      if (f.size() == 2) meta[f[0]] = f[1];
    }
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw IoError(std::string("meta key missing: ") + key);
    return it->second;
  };
  StoredInstance s;
  auto& inst = s.instance;
  auto& p = s.meta.params;
  inst.n = p.n = parse_u64(field("n"));
  inst.d = p.d = parse_u64(field("d"));
  if (inst.n > kMaxDim || inst.d > kMaxDim) throw IoError("implausible instance dimensions");
  try {
    p.kind = parse_model(field("model"));
  } catch (const UsageError& e) {
    throw IoError(e.what());
  }
  p.rho = parse_double(field("rho"));
  p.r = parse_double(field("r"));
  p.p = parse_double(field("p"));
  p.nu = parse_double(field("nu"));
  s.meta.seed = parse_u64(field("seed"));
  inst.a1 = Matrix(inst.n, inst.n);
  inst.a2 = Matrix(inst.n, inst.n);
  inst.x = Matrix(inst.n, inst.d);
  inst.y = Matrix(inst.n, inst.d);
  read_edges(with_suffix(prefix, "_A1.csv"), inst.a1);
  read_edges(with_suffix(prefix, "_A2.csv"), inst.a2);
  read_features(with_suffix(prefix, "_X.csv"), inst.x);
  read_features(with_suffix(prefix, "_Y.csv"), inst.y);
  const auto truth_path = with_suffix(prefix, "_truth.csv");
  if (std::filesystem::exists(truth_path)) {
    auto in = open_in(truth_path);
    std::string line;
    std::getline(in, line);
    std::vector<std::size_t> map(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) {
      if (!std::getline(in, line)) throw IoError("truth file too short");
      const auto f = split(line);
      if (f.size() != 2 || parse_u64(f[0]) != i) throw IoError("bad truth row");
      map[i] = parse_u64(f[1]);
    }
    try {
      inst.truth = Permutation(std::move(map));
    } catch (const UsageError&) {
      throw IoError("stored truth is not a permutation");
    }
  }
  try {
    inst.validate();
  } catch (const std::exception& e) {
    throw IoError(std::string("invalid instance: ") + e.what());
  }
  return s;
}

StoredInstance read_any(const std::filesystem::path& path) {
  if (std::filesystem::is_regular_file(path)) return read_binary(path);
  if (std::filesystem::exists(with_suffix(path, "_meta.csv"))) return read_csv(path);
  throw IoError("no instance at " + path.string());
}

}  // namespace qpalign::io
