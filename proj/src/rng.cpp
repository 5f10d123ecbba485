#include "tzopt/rng.hpp"

#include <cmath>
#include <numbers>

namespace tzopt {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

} // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

NormalStream::NormalStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint32_t tag)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      counter_{0u, tag, static_cast<std::uint32_t>(stream_index),
               static_cast<std::uint32_t>(stream_index >> 32)} {}

double NormalStream::uniform() {
    if (uniforms_available_ == 0) {
        const auto out = Philox4x32::generate(counter_, key_);
        ++counter_[0];
        uniforms_ = {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
        uniforms_available_ = 2;
    }
    return uniforms_[2 - uniforms_available_--];
}

void NormalStream::refill() {
    const auto out = Philox4x32::generate(counter_, key_);
    ++counter_[0];
    const double radius = std::sqrt(-2.0 * std::log(to_unit(out[0], out[1])));
    const double angle = 2.0 * std::numbers::pi * to_unit(out[2], out[3]);
    buffer_ = {radius * std::cos(angle), radius * std::sin(angle)};
    available_ = 2;
}

double NormalStream::normal() {
    if (available_ == 0) {
        refill();
    }
    return buffer_[2 - available_--];
}

} // namespace tzopt
