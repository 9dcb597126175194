#include "vsr/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "vsr/errors.hpp"

namespace vsr {

namespace {

constexpr char kMagic[8] = {'V', 'S', 'R', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Writer {
  std::string buf;
  void raw(const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
};

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  explicit Reader(const std::string& b) : buf(b) {}
  void raw(void* p, std::size_t n) {
    if (pos + n > buf.size()) throw CorruptFile("checkpoint: truncated payload");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    std::vector<double> v(n);
    raw(v.data(), n * sizeof(double));
    return v;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const ParamRegistry& params,
                     const AdamW& opt, const CheckpointMeta& meta) {
  Writer w;
  w.str(meta.config_echo);
  w.u32(static_cast<std::uint32_t>(meta.epoch));
  w.i64(meta.global_step);
  w.f64(meta.frame_mean);
  w.f64(meta.frame_std);
  for (std::uint64_t s : meta.rng_state) w.u64(s);
  w.u32(meta.rng_has_cached ? 1 : 0);
  w.f64(meta.rng_cached);

  const auto& items = params.items();
  w.u32(static_cast<std::uint32_t>(items.size()));
  for (const auto& [name, t] : items) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t->shape.size()));
    for (int d : t->shape) w.u32(static_cast<std::uint32_t>(d));
    w.doubles(t->data);
  }
  w.i64(opt.step_count());
  for (std::size_t i = 0; i < items.size(); ++i) {
    w.doubles(opt.m()[i]);
    w.doubles(opt.v()[i]);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingFile("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  const std::uint64_t size = w.buf.size();
  out.write(reinterpret_cast<const char*>(&size), sizeof size);
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  const std::uint64_t checksum = fnv1a(w.buf);
  out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
}

CheckpointMeta load_checkpoint(const std::string& path,
                               const ParamRegistry& params, AdamW* opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("checkpoint not found: " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, 8) != 0)
    throw VersionMismatch("checkpoint: bad magic in " + path);
  std::uint32_t version;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof version) ||
      version != kVersion)
    throw VersionMismatch("checkpoint: unsupported format version");
  std::uint64_t size;
  if (!in.read(reinterpret_cast<char*>(&size), sizeof size))
    throw CorruptFile("checkpoint: truncated size field");
  std::string payload(size, '\0');
  if (!in.read(payload.data(), static_cast<std::streamsize>(size)))
    throw CorruptFile("checkpoint: truncated payload");
  std::uint64_t checksum;
  if (!in.read(reinterpret_cast<char*>(&checksum), sizeof checksum) ||
      checksum != fnv1a(payload))
    throw CorruptFile("checkpoint: checksum mismatch");

  Reader r(payload);
  CheckpointMeta meta;
  meta.config_echo = r.str();
  meta.epoch = static_cast<int>(r.u32());
  meta.global_step = r.i64();
  meta.frame_mean = r.f64();
  meta.frame_std = r.f64();
  for (auto& s : meta.rng_state) s = r.u64();
  meta.rng_has_cached = r.u32() != 0;
  meta.rng_cached = r.f64();

  const auto& items = params.items();
  const std::uint32_t count = r.u32();
  if (count != items.size())
    throw VersionMismatch("checkpoint: parameter count mismatch");
  for (const auto& [name, t] : items) {
    const std::string got = r.str();
    if (got != name)
      throw VersionMismatch("checkpoint: parameter order mismatch at " + got);
    const std::uint32_t ndim = r.u32();
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(r.u32());
    if (shape != t->shape)
      throw ShapeMismatch("checkpoint: shape mismatch for " + name);
    std::vector<double> data = r.doubles();
    if (data.size() != t->data.size())
      throw ShapeMismatch("checkpoint: size mismatch for " + name);
    t->data = std::move(data);
  }
  const std::int64_t t_opt = r.i64();
  std::vector<std::vector<double>> m, v;
  m.reserve(items.size());
  v.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    m.push_back(r.doubles());
    v.push_back(r.doubles());
  }
  if (opt) opt->restore(t_opt, std::move(m), std::move(v));
  return meta;
}

}  // namespace vsr
