#include "ecgraph/checkpoint.hpp"

#include <cstring>

#include "ecgraph/signal_io.hpp"

namespace ecgraph {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  out.append(b, 4);
}

void put_i32(std::string& out, std::int32_t v) { put_u32(out, std::uint32_t(v)); }

void put_f32(std::string& out, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(out, v);
}

void put_f64(std::string& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u32(out, std::uint32_t(v & 0xffffffffu));
  put_u32(out, std::uint32_t(v >> 32));
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) fail(Errc::DecodeError, "model file is truncated");
  }
  std::uint32_t u32() {
    need(4);
    auto b = [&](std::size_t i) { return std::uint32_t(std::uint8_t(bytes[pos + i])); };
    std::uint32_t v = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
    pos += 4;
    return v;
  }
  std::int32_t i32() { return std::int32_t(u32()); }
  float f32() {
    std::uint32_t v = u32();
    float f;
    std::memcpy(&f, &v, 4);
    return f;
  }
  double f64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    std::uint64_t v = lo | (hi << 32);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

} // namespace

std::string format_checkpoint(const ModelConfig& cfg, const CrtNetParams& params) {
  check_params(cfg, params);
  std::string out;
  out.append("CRTN", 4);
  put_u32(out, kCheckpointVersion);
  put_i32(out, cfg.input_length);
  put_i32(out, cfg.input_leads);
  put_i32(out, cfg.n_classes);
  put_i32(out, cfg.n_cnn_blocks);
  put_i32(out, cfg.conv_channels);
  put_i32(out, cfg.kernel_size);
  put_i32(out, cfg.pool_size);
  put_i32(out, cfg.gru_hidden);
  put_i32(out, cfg.n_encoders);
  put_i32(out, cfg.n_heads);
  put_i32(out, cfg.ff_dim);
  put_f64(out, cfg.dropout_rate);
  put_f64(out, cfg.leaky_slope);
  put_u32(out, std::uint32_t(params.tensors.size()));
  for (const auto& [name, t] : params.tensors) {
    put_u32(out, std::uint32_t(name.size()));
    out += name;
    put_u32(out, std::uint32_t(t.rank()));
    for (auto d : t.shape()) put_u32(out, std::uint32_t(d));
    for (std::size_t i = 0; i < t.numel(); ++i) put_f32(out, float(t[i]));
  }
  return out;
}

LoadedModel parse_checkpoint(const std::string& bytes) {
  Reader r{bytes};
  if (r.str(4) != "CRTN") fail(Errc::DecodeError, "not a model file (bad magic)");
  std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    fail(Errc::DecodeError, "unsupported model file version " + std::to_string(version));

  LoadedModel m;
  m.config.input_length = r.i32();
  m.config.input_leads = r.i32();
  m.config.n_classes = r.i32();
  m.config.n_cnn_blocks = r.i32();
  m.config.conv_channels = r.i32();
  m.config.kernel_size = r.i32();
  m.config.pool_size = r.i32();
  m.config.gru_hidden = r.i32();
  m.config.n_encoders = r.i32();
  m.config.n_heads = r.i32();
  m.config.ff_dim = r.i32();
  m.config.dropout_rate = r.f64();
  m.config.leaky_slope = r.f64();
  m.config.validate();

  std::uint32_t n_tensors = r.u32();
  for (std::uint32_t k = 0; k < n_tensors; ++k) {
    std::uint32_t name_len = r.u32();
    if (name_len > 4096) fail(Errc::DecodeError, "unreasonable tensor name length");
    std::string name = r.str(name_len);
    std::uint32_t ndim = r.u32();
    if (ndim == 0 || ndim > 8) fail(Errc::DecodeError, "unreasonable tensor rank");
    std::vector<std::size_t> shape(ndim);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = r.u32();
      if (d == 0 || numel > (std::size_t(1) << 32) / d)
        fail(Errc::DecodeError, "unreasonable tensor shape");
      numel *= d;
    }
    Tensor t(shape);
    for (std::size_t i = 0; i < numel; ++i) t[i] = double(r.f32());
    if (!m.params.tensors.emplace(std::move(name), std::move(t)).second)
      fail(Errc::DecodeError, "duplicate tensor name in model file");
  }
  if (r.pos != bytes.size()) fail(Errc::DecodeError, "trailing bytes after model payload");
  check_params(m.config, m.params);
  return m;
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const CrtNetParams& params) {
  atomic_write_file(path, format_checkpoint(cfg, params));
}

LoadedModel load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

} // namespace ecgraph
