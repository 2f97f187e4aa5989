#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace pianolm::testing {

/// Builds raw SMF bytes event by event.
class TrackBuilder {
public:
  TrackBuilder& delta(std::uint32_t ticks) {
    std::uint8_t buf[4];
    int n = 0;
    buf[n++] = ticks & 0x7f;
    while (ticks >>= 7) buf[n++] = 0x80 | (ticks & 0x7f);
    while (n) bytes_.push_back(buf[--n]);
    return *this;
  }
  TrackBuilder& raw(std::initializer_list<int> b) {
    for (int v : b) bytes_.push_back(static_cast<std::uint8_t>(v));
    return *this;
  }
  TrackBuilder& on(std::uint32_t dt, int pitch, int vel, int ch = 0) { return delta(dt).raw({0x90 | ch, pitch, vel}); }
  TrackBuilder& off(std::uint32_t dt, int pitch, int ch = 0) { return delta(dt).raw({0x80 | ch, pitch, 64}); }
  TrackBuilder& cc(std::uint32_t dt, int controller, int value) { return delta(dt).raw({0xB0, controller, value}); }
  TrackBuilder& tempo(std::uint32_t dt, std::uint32_t us_per_quarter) {
    return delta(dt).raw({0xFF, 0x51, 0x03, static_cast<int>(us_per_quarter >> 16),
                          static_cast<int>((us_per_quarter >> 8) & 0xff), static_cast<int>(us_per_quarter & 0xff)});
  }
  TrackBuilder& end(std::uint32_t dt = 0) { return delta(dt).raw({0xFF, 0x2F, 0x00}); }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

inline void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::vector<std::uint8_t> smf_file(int format, std::uint16_t division, const std::vector<TrackBuilder>& tracks) {
  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd'};
  put_be(out, 6, 4);
  put_be(out, static_cast<std::uint32_t>(format), 2);
  put_be(out, static_cast<std::uint32_t>(tracks.size()), 2);
  put_be(out, division, 2);
  for (const auto& t : tracks) {
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_be(out, static_cast<std::uint32_t>(t.bytes().size()), 4);
    out.insert(out.end(), t.bytes().begin(), t.bytes().end());
  }
  return out;
}

}  // namespace pianolm::testing
