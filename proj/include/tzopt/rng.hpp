#pragma once

#include <array>
#include <cstdint>

namespace tzopt {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Multipliers 0xD2511F53 and 0xCD9E8D57, Weyl key increments 0x9E3779B9 and
/// 0xBB67AE85, ten rounds. Output is a pure function of (counter, key), so any
/// stream can be evaluated independently of any other.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Stream tags keep independent uses of one master seed apart.
inline constexpr std::uint32_t kPriceStreamTag = 0;
inline constexpr std::uint32_t kSignalEnergyStreamTag = 1;
inline constexpr std::uint32_t kProbeStreamTag = 2;

/// Standard normal draws for stream (master_seed, stream_index, tag).
///
/// Key = the two 32-bit halves of master_seed; counter = (block, tag,
/// low and high halves of stream_index). Each block yields two uniforms on
/// (0, 1) with 53-bit resolution, turned into two normals by Box-Muller.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint32_t tag = kPriceStreamTag);

    double uniform();
    double normal();

private:
    void refill();

    Philox4x32::Key key_;
    Philox4x32::Counter counter_;
    std::array<double, 2> buffer_{};
    int available_ = 0;
    std::array<double, 2> uniforms_{};
    int uniforms_available_ = 0;
};

} // namespace tzopt
