#pragma once

#include <array>
#include <cstdint>

namespace metalr {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 128-bit counter under a 64-bit key to 128
/// pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Dataset tags used in stream ids. Every random quantity in the library is
/// drawn from the stream (seed, tag, index), so results never depend on the
/// order in which tasks are generated.
enum class StreamTag : std::uint32_t {
  Meta = 0,
  Light1 = 1,
  Heavy = 2,
  Light2 = 3,
  EmInit = 4,
  Prediction = 5,
  Trial = 6,
};

struct StreamId {
  StreamTag tag = StreamTag::Meta;
  std::uint64_t index = 0;
};

/// Counter-based random stream.
///
/// The Philox key is the 64-bit seed. The counter words are
/// (block, index_lo, index_hi, tag), so stream (tag, index) owns 2^32
/// consecutive blocks of 128 bits and distinct streams never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamId id);

  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// +1 or -1 with equal probability.
  double rademacher() { return (next_u32() & 1u) ? 1.0 : -1.0; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent seed for a nested experiment (e.g. one repeat of a
/// benchmark cell) from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace metalr
