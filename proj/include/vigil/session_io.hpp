#pragma once

// Session file formats.
//
// CSV:    line 1 "#fs=<int>", line 2 "ch:<label>,ch:<label>,...", then one row
//         of decimal voltages per time sample. Labels live in a sibling file
//         "<stem>.perclos.csv" with rows "epoch_index,perclos".
// Binary: "EEGS" | u16 version=1 | u16 n_channels | u32 fs | u64 n_samples |
//         n_channels x 16-byte NUL-padded ASCII labels | channel-major f32 data |
//         u32 perclos count | f32 perclos values. Everything little-endian.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/signal.hpp"

namespace vigil {

enum class SessionFormat { Csv, Binary };

struct LoadOptions {
  /// Channels the pipeline is configured for. Empty accepts whatever the file has.
  std::vector<std::string> expected_channels = default_channels();
};

inline constexpr std::uint16_t kSessionVersion = 1;
inline constexpr std::size_t kLabelBytes = 16;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && !text.empty();
}

template <typename T>
std::string format_number(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::filesystem::path perclos_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension();
  p += ".perclos.csv";
  return p;
}

template <typename T>
void put_le(std::string& buf, T value) {
  using U = std::make_unsigned_t<std::conditional_t<std::is_floating_point_v<T>,
                                                    std::conditional_t<sizeof(T) == 4, std::int32_t, std::int64_t>, T>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
  ByteReader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > data_.size())
      throw ParseError(name_ + ": truncated at byte " + std::to_string(pos_) + " reading " + what);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, float>) {
      return std::bit_cast<float>(static_cast<std::uint32_t>(bits));
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string_view bytes(std::size_t n, const char* what) {
    if (pos_ + n > data_.size())
      throw ParseError(name_ + ": truncated at byte " + std::to_string(pos_) + " reading " + what);
    std::string_view v(data_.data() + pos_, n);
    pos_ += n;
    return v;
  }

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  const std::string& name() const noexcept { return name_; }

private:
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

/// Drops channels outside the configured set (with a warning), then requires
/// the configured set to be present exactly.
inline Session conform_channels(Session s, const LoadOptions& opt, const std::string& where) {
  if (opt.expected_channels.empty()) return s;
  std::vector<std::string> kept;
  for (const auto& ch : s.channels) {
    if (std::find(opt.expected_channels.begin(), opt.expected_channels.end(), ch) ==
        opt.expected_channels.end())
      warn(where + ": ignoring channel " + ch + " outside the configured channel set");
    else
      kept.push_back(ch);
  }
  if (kept.size() != opt.expected_channels.size())
    throw ParseError(where + ": channel count mismatch (" + std::to_string(kept.size()) +
                     " usable channels, configuration expects " +
                     std::to_string(opt.expected_channels.size()) + ")");
  if (kept.size() == s.channels.size() && s.channels == opt.expected_channels) return s;
  return select_channels(s, opt.expected_channels);
}

}  // namespace detail

inline std::vector<float> read_perclos_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw ParseError("labels not found: " + path.string());
  const std::string text = detail::read_file(path);
  std::vector<float> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = detail::split(t, ',');
    std::size_t idx = 0;
    float p = 0.0f;
    if (fields.size() != 2 || !detail::parse_number(fields[0], idx) || !detail::parse_number(fields[1], p)) {
      if (lineno == 1 && out.empty()) continue;  // header row
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'epoch_index,perclos'");
    }
    if (idx != out.size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": epoch index " +
                       std::to_string(idx) + " out of sequence (expected " + std::to_string(out.size()) + ")");
    if (!(p >= 0.0f && p <= 1.0f))
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": perclos outside [0, 1]");
    out.push_back(p);
  }
  return out;
}

inline Session load_session_csv(const std::filesystem::path& path, const LoadOptions& opt = {}) {
  const std::string name = path.string();
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;

  Session s;
  s.subject_id = path.stem().string();

  if (!std::getline(in, line) || detail::trim(line).rfind("#fs=", 0) != 0)
    throw ParseError(name + ":1: malformed header, expected '#fs=<int>'");
  {
    const auto t = detail::trim(line);
    if (!detail::parse_number(std::string_view(t).substr(4), s.fs) || s.fs <= 0)
      throw ParseError(name + ":1: malformed header, bad sampling rate");
  }
  if (!std::getline(in, line)) throw ParseError(name + ":2: missing channel header");
  const std::string header = detail::trim(line);
  for (auto field : detail::split(header, ',')) {
    const auto f = detail::trim(field);
    if (f.rfind("ch:", 0) != 0 || f.size() == 3)
      throw ParseError(name + ":2: malformed channel header field '" + f + "'");
    s.channels.push_back(f.substr(3));
  }

  const std::size_t nch = s.channels.size();
  std::vector<std::vector<float>> cols(nch);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto fields = detail::split(t, ',');
    if (fields.size() != nch)
      throw ParseError(name + ":" + std::to_string(lineno) + ": row has " + std::to_string(fields.size()) +
                       " values, expected " + std::to_string(nch));
    for (std::size_t c = 0; c < nch; ++c) {
      float v = 0.0f;
      if (!detail::parse_number(fields[c], v))
        throw ParseError(name + ":" + std::to_string(lineno) + ": bad number in column " + std::to_string(c));
      cols[c].push_back(v);
    }
  }
  const std::size_t n = nch ? cols[0].size() : 0;
  s.data = Matrix<float>(nch, n);
  for (std::size_t c = 0; c < nch; ++c) std::copy(cols[c].begin(), cols[c].end(), s.data.row(c).begin());

  s.perclos = read_perclos_csv(detail::perclos_path(path));
  if (s.perclos.size() != s.n_epochs())
    throw ParseError(name + ": perclos/epoch count mismatch (" + std::to_string(s.perclos.size()) +
                     " labels for " + std::to_string(s.n_epochs()) + " epochs)");
  return detail::conform_channels(std::move(s), opt, name);
}

inline Session load_session_binary(const std::filesystem::path& path, const LoadOptions& opt = {}) {
  detail::ByteReader r(detail::read_file(path), path.string());
  const auto magic = r.bytes(4, "magic");
  if (magic != "EEGS") throw ParseError(r.name() + ": bad magic at byte 0");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kSessionVersion)
    throw ParseError(r.name() + ": unsupported version " + std::to_string(version) + " at byte 4");
  const auto nch = r.get<std::uint16_t>("n_channels");
  const auto fs = r.get<std::uint32_t>("fs");
  const auto ns = r.get<std::uint64_t>("n_samples");
  if (fs == 0 || fs > 1'000'000) throw ParseError(r.name() + ": bad sampling rate at byte 8");

  Session s;
  s.subject_id = path.stem().string();
  s.fs = static_cast<int>(fs);
  for (std::size_t c = 0; c < nch; ++c) {
    const auto raw = r.bytes(kLabelBytes, "channel label");
    s.channels.emplace_back(raw.substr(0, std::min(raw.find('\0'), raw.size())));
  }
  if (ns > r.remaining() / 4 / std::max<std::size_t>(nch, 1))
    throw ParseError(r.name() + ": sample block at byte " + std::to_string(r.offset()) +
                     " shorter than header claims");
  s.data = Matrix<float>(nch, static_cast<std::size_t>(ns));
  for (auto& v : s.data.flat()) v = r.get<float>("samples");
  const auto np = r.get<std::uint32_t>("perclos count");
  s.perclos.reserve(np);
  for (std::uint32_t i = 0; i < np; ++i) s.perclos.push_back(r.get<float>("perclos"));
  if (r.remaining() != 0)
    throw ParseError(r.name() + ": trailing bytes at byte " + std::to_string(r.offset()));
  if (s.perclos.size() != s.n_epochs())
    throw ParseError(r.name() + ": perclos/epoch count mismatch (" + std::to_string(s.perclos.size()) +
                     " labels for " + std::to_string(s.n_epochs()) + " epochs)");
  for (float p : s.perclos)
    if (!(p >= 0.0f && p <= 1.0f)) throw ParseError(r.name() + ": perclos outside [0, 1]");
  return detail::conform_channels(std::move(s), opt, r.name());
}

inline Session load_session(const std::filesystem::path& path, SessionFormat fmt, const LoadOptions& opt = {}) {
  return fmt == SessionFormat::Csv ? load_session_csv(path, opt) : load_session_binary(path, opt);
}

/// Guesses the format from the extension: ".csv" is CSV, anything else binary.
inline SessionFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? SessionFormat::Csv : SessionFormat::Binary;
}

inline std::string encode_session_binary(const Session& s) {
  validate(s);
  if (s.channels.size() > 0xFFFF) throw DomainError("too many channels for binary format");
  std::string buf = "EEGS";
  detail::put_le(buf, kSessionVersion);
  detail::put_le(buf, static_cast<std::uint16_t>(s.channels.size()));
  detail::put_le(buf, static_cast<std::uint32_t>(s.fs));
  detail::put_le(buf, static_cast<std::uint64_t>(s.n_samples()));
  for (const auto& ch : s.channels) {
    if (ch.size() > kLabelBytes) throw DomainError("channel label longer than 16 bytes: " + ch);
    std::string padded = ch;
    padded.resize(kLabelBytes, '\0');
    buf += padded;
  }
  buf.reserve(buf.size() + 4 * s.data.flat().size() + 4 + 4 * s.perclos.size());
  for (float v : s.data.flat()) detail::put_le(buf, v);
  detail::put_le(buf, static_cast<std::uint32_t>(s.perclos.size()));
  for (float p : s.perclos) detail::put_le(buf, p);
  return buf;
}

inline void write_session_binary(const std::filesystem::path& path, const Session& s) {
  detail::write_file(path, encode_session_binary(s));
}

inline void write_session_csv(const std::filesystem::path& path, const Session& s) {
  validate(s);
  std::string out = "#fs=" + std::to_string(s.fs) + "\n";
  for (std::size_t c = 0; c < s.channels.size(); ++c) out += (c ? ",ch:" : "ch:") + s.channels[c];
  out += '\n';
  for (std::size_t t = 0; t < s.n_samples(); ++t) {
    for (std::size_t c = 0; c < s.channels.size(); ++c) {
      if (c) out += ',';
      out += detail::format_number(s.data(c, t));
    }
    out += '\n';
  }
  detail::write_file(path, out);

  std::string labels;
  for (std::size_t k = 0; k < s.perclos.size(); ++k)
    labels += std::to_string(k) + "," + detail::format_number(s.perclos[k]) + "\n";
  detail::write_file(detail::perclos_path(path), labels);
}

inline void write_session(const std::filesystem::path& path, const Session& s, SessionFormat fmt) {
  fmt == SessionFormat::Csv ? write_session_csv(path, s) : write_session_binary(path, s);
}

}  // namespace vigil
