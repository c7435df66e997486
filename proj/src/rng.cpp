// SPDX-License-Identifier: Apache-2.0
#include "ndslab/rng.hpp"

namespace ndslab
{
namespace
{
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi)
{
    std::uint64_t const p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}
}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key)
{
    for (int round = 0; round < 10; ++round)
    {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMulA, ctr[0], lo0, hi0);
        mulhilo(kMulB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

StreamRng::StreamRng(std::uint64_t seed, std::uint32_t id)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      id_(id)
{
}

StreamRng::result_type StreamRng::operator()()
{
    // Each block yields two 64-bit words; counter = (block index, stream id).
    std::uint64_t const block_index = position_ >> 1;
    if ((position_ & 1u) == 0)
    {
        buffer_ = Philox4x32::block(
            {static_cast<std::uint32_t>(block_index),
             static_cast<std::uint32_t>(block_index >> 32), id_, 0u},
            key_);
    }
    std::size_t const half = (position_ & 1u) * 2;
    ++position_;
    return (static_cast<std::uint64_t>(buffer_[half + 1]) << 32)
           | buffer_[half];
}

double StreamRng::uniform()
{
    // 53 random bits, shifted off zero.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace ndslab
