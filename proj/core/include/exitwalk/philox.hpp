#pragma once

#include <array>
#include <cstdint>

namespace exitwalk {

/// Philox4x32-10 counter-based generator. A block is a pure function of
/// (key, counter), so shard s / draw i can be evaluated in any order on any
/// thread and the stream is still bit-identical. Verified against the
/// published known-answer vectors in the tests.
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block rounds10(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 =
          static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 =
          static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = Block{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// One logical random stream: fixed (seed, stream id), indexed by draw.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  Philox4x32::Block block_at(std::uint64_t i) const {
    return Philox4x32::rounds10(
        Philox4x32::Block{static_cast<std::uint32_t>(i),
                          static_cast<std::uint32_t>(i >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
  }

  /// Two uniforms in [0, 1) from one block; 53-bit mantissas.
  std::array<double, 2> uniforms_at(std::uint64_t i) const {
    const auto b = block_at(i);
    const std::uint64_t a =
        (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    const std::uint64_t c =
        (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    constexpr double scale = 0x1.0p-53;
    return {static_cast<double>(a >> 11) * scale,
            static_cast<double>(c >> 11) * scale};
  }

  std::uint64_t stream() const { return stream_; }

private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
};

} // namespace exitwalk
