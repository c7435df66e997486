// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ndslab
{

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 block function.
 *
 * Counter-based: the output is a pure function of (counter, key), so any
 * stream position can be computed without replaying the stream.
 */
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

// Stream ids used by the simulator. One substream per arrival class and per
// activity, plus the policy stream and the in-service pick stream.
namespace stream_id
{
inline constexpr std::uint32_t arrival_base = 0x00010000u;
inline constexpr std::uint32_t activity_base = 0x00020000u;
inline constexpr std::uint32_t policy = 0x00030000u;
inline constexpr std::uint32_t customer_pick = 0x00030001u;
inline constexpr std::uint32_t rbm_base = 0x00040000u;
inline constexpr std::uint32_t restart = 0x00050000u;
}  // namespace stream_id

//---------------------------------------------------------------------------//
/*!
 * A named substream of a replication seed.
 *
 * Satisfies UniformRandomBitGenerator so it can drive the standard
 * distributions. Two streams with the same (seed, id) produce identical
 * sequences; distinct ids are statistically independent.
 */
class StreamRng
{
  public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, std::uint32_t id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max()
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()();

    // Uniform on the open interval (0, 1).
    double uniform();

    // Number of 64-bit words drawn so far.
    std::uint64_t position() const { return position_; }

  private:
    Philox4x32::Key key_;
    std::uint32_t id_;
    std::uint64_t position_ = 0;
    Philox4x32::Counter buffer_{};
};

}  // namespace ndslab
