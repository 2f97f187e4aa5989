#include <cstring>

#include "json.hpp"
#include "pianolm/error.hpp"
#include "pianolm/lm/checkpoint.hpp"

namespace pianolm::lm {

namespace {

constexpr std::string_view kVelocityPrefix = "optimizer.velocity/";

void write_tensor(ByteWriter& w, const std::string& name, const Mat<float>& m) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f32(m.data()[i]);
}

void read_tensors(ByteReader& r, ModelParams<float>& target, const std::string& prefix) {
  for (auto& t : target.tensors()) {
    const auto at = r.offset();
    const auto name = r.str();
    if (name != prefix + t.name) throw ParseError("expected tensor '" + prefix + t.name + "', found '" + name + "'", at);
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (rows != t.value->rows() || cols != t.value->cols())
      throw ParseError("tensor '" + name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", config expects " + std::to_string(t.value->rows()) + "x" +
                           std::to_string(t.value->cols()),
                       at);
    for (Eigen::Index i = 0; i < t.value->size(); ++i) t.value->data()[i] = r.f32();
  }
}

}  // namespace

Bytes encode_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  w.magic("MVLM");
  w.u64(c.config_digest);
  w.u64(c.codec_digest);
  w.str(c.params.config.to_json());
  const auto tensors = c.params.tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) write_tensor(w, t.name, *t.value);
  w.u32(c.optimizer ? 1u : 0u);
  if (c.optimizer) {
    w.u64(c.optimizer->step);
    for (const auto& t : c.optimizer->velocity.tensors()) write_tensor(w, std::string(kVelocityPrefix) + t.name, *t.value);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  r.expect_magic("MVLM");
  Checkpoint c;
  c.config_digest = r.u64();
  c.codec_digest = r.u64();
  const auto config_at = r.offset();
  ModelConfig config;
  try {
    config = ModelConfig::from_json(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model config: ") + e.what(), config_at);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("bad model config: ") + e.what(), config_at);
  }
  c.params = ModelParams<float>::zeros_like(config);
  const auto count_at = r.offset();
  const auto count = r.u32();
  if (count != c.params.tensors().size())
    throw ParseError("checkpoint holds " + std::to_string(count) + " tensors, config expects " +
                         std::to_string(c.params.tensors().size()),
                     count_at);
  read_tensors(r, c.params, "");
  if (r.u32() != 0) {
    OptimizerState opt = OptimizerState::for_model(c.params);
    opt.step = r.u64();
    read_tensors(r, opt.velocity, std::string(kVelocityPrefix));
    c.optimizer = std::move(opt);
  }
  if (!r.at_end()) throw ParseError("trailing bytes after checkpoint", r.offset());
  return c;
}

}  // namespace pianolm::lm
