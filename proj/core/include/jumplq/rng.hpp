#pragma once

#include <array>
#include <cstdint>

namespace jumplq {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). The output
/// is a pure function of (key, counter), so any stream element can be drawn in
/// any order on any thread.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) noexcept : key_(key) {}
  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const noexcept;

 private:
  Key key_;
};

/// Uniform in the open interval (0, 1) from two 32-bit words (52 bits).
double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Draws keyed by (seed, stream, a, b, tag). The stream is typically a path
/// index; (a, b) locate the draw inside the stream and `tag` separates uses.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t stream) noexcept : gen_(seed), stream_(stream) {}

  /// Two independent uniforms in (0, 1).
  std::array<double, 2> uniforms(std::uint32_t a, std::uint32_t b, std::uint32_t tag) const noexcept;
  /// Standard normal via Box-Muller on `uniforms`.
  double normal(std::uint32_t a, std::uint32_t b, std::uint32_t tag) const noexcept;

 private:
  Philox4x32 gen_;
  std::uint32_t stream_;
};

}  // namespace jumplq
