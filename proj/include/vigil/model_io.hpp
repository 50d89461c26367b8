#pragma once

// OvoModel persistence.
//
// Binary: "OVOM" | u16 version=1 | u8 kernel kind | f64 kernel scale |
//         u8 n_classes | n_classes x u8 class | u32 n_binaries | per binary:
//         u8 lower class | u8 upper class | u32 n_sv | u32 dim | f64 bias |
//         n_sv x f64 coef | n_sv x dim x f64 support vectors (row-major).
// All little-endian.

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vigil/session_io.hpp"
#include "vigil/svm.hpp"

namespace vigil {

inline constexpr std::uint16_t kModelVersion = 1;

namespace detail {
inline VigilanceClass class_from_byte(std::uint8_t b, const ByteReader& r) {
  if (b >= kNumClasses) throw ParseError(r.name() + ": bad class id at byte " + std::to_string(r.offset() - 1));
  return static_cast<VigilanceClass>(b);
}
}  // namespace detail

inline std::string encode_model(const OvoModel& m) {
  std::string buf = "OVOM";
  detail::put_le(buf, kModelVersion);
  detail::put_le(buf, static_cast<std::uint8_t>(m.kernel.kind));
  detail::put_le(buf, m.kernel.scale);
  detail::put_le(buf, static_cast<std::uint8_t>(m.classes.size()));
  for (auto c : m.classes) detail::put_le(buf, static_cast<std::uint8_t>(c));
  detail::put_le(buf, static_cast<std::uint32_t>(m.binaries.size()));
  for (const auto& b : m.binaries) {
    detail::put_le(buf, static_cast<std::uint8_t>(b.class_pair.first));
    detail::put_le(buf, static_cast<std::uint8_t>(b.class_pair.second));
    detail::put_le(buf, static_cast<std::uint32_t>(b.coef.size()));
    detail::put_le(buf, static_cast<std::uint32_t>(b.support_vectors.cols()));
    detail::put_le(buf, b.bias);
    for (double c : b.coef) detail::put_le(buf, c);
    for (double v : b.support_vectors.flat()) detail::put_le(buf, v);
  }
  return buf;
}

inline OvoModel decode_model(std::string bytes, const std::string& name = "model") {
  detail::ByteReader r(std::move(bytes), name);
  if (r.bytes(4, "magic") != "OVOM") throw ParseError(name + ": bad magic at byte 0");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kModelVersion) throw ParseError(name + ": unsupported version " + std::to_string(version));
  OvoModel m;
  const auto kind = r.get<std::uint8_t>("kernel kind");
  if (kind > 1) throw ParseError(name + ": bad kernel kind at byte 6");
  m.kernel.kind = static_cast<KernelKind>(kind);
  m.kernel.scale = std::bit_cast<double>(r.get<std::uint64_t>("kernel scale"));
  const auto nc = r.get<std::uint8_t>("class count");
  for (std::uint8_t i = 0; i < nc; ++i) m.classes.push_back(detail::class_from_byte(r.get<std::uint8_t>("class"), r));
  const auto nb = r.get<std::uint32_t>("binary count");
  for (std::uint32_t i = 0; i < nb; ++i) {
    BinarySvmModel b;
    b.kernel = m.kernel;
    b.class_pair.first = detail::class_from_byte(r.get<std::uint8_t>("class"), r);
    b.class_pair.second = detail::class_from_byte(r.get<std::uint8_t>("class"), r);
    const auto nsv = r.get<std::uint32_t>("support vector count");
    const auto dim = r.get<std::uint32_t>("dimension");
    b.bias = std::bit_cast<double>(r.get<std::uint64_t>("bias"));
    if (static_cast<std::uint64_t>(nsv) * (dim + 1) * 8 > r.remaining())
      throw ParseError(name + ": support vector block at byte " + std::to_string(r.offset()) + " is truncated");
    b.coef.resize(nsv);
    for (auto& c : b.coef) c = std::bit_cast<double>(r.get<std::uint64_t>("coef"));
    b.support_vectors = Matrix<double>(nsv, dim);
    for (auto& v : b.support_vectors.flat()) v = std::bit_cast<double>(r.get<std::uint64_t>("support vector"));
    m.binaries.push_back(std::move(b));
  }
  if (r.remaining() != 0) throw ParseError(name + ": trailing bytes at byte " + std::to_string(r.offset()));
  return m;
}

inline void save_model(const std::filesystem::path& path, const OvoModel& m) {
  detail::write_file(path, encode_model(m));
}

inline OvoModel load_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file(path), path.string());
}

/// Human-readable dump for debugging; not read back.
inline nlohmann::json model_to_json(const OvoModel& m) {
  nlohmann::json j;
  j["kernel"] = {{"kind", to_string(m.kernel.kind)}, {"scale", m.kernel.scale}};
  for (auto c : m.classes) j["classes"].push_back(to_string(c));
  j["binaries"] = nlohmann::json::array();
  for (const auto& b : m.binaries) {
    nlohmann::json jb;
    jb["pair"] = {to_string(b.class_pair.first), to_string(b.class_pair.second)};
    jb["bias"] = b.bias;
    jb["coef"] = b.coef;
    jb["support_vectors"] = nlohmann::json::array();
    for (std::size_t i = 0; i < b.support_vectors.rows(); ++i) {
      auto row = b.support_vectors.row(i);
      jb["support_vectors"].push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["binaries"].push_back(std::move(jb));
  }
  return j;
}

}  // namespace vigil
