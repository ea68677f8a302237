#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace parid {

/// Counter-based Philox4x32-10 generator.
///
/// A stream is addressed by (seed, replication, substream); the draw index is
/// the low 48 bits of the counter. Two streams with different addresses never
/// overlap, and any draw can be reproduced from its address alone, so
/// replications can run on any worker in any order.
class Stream {
public:
    using result_type = std::uint64_t;

    /// Substreams used by the engine. Weight draws and endpoint draws are kept
    /// apart so the coupled run can replay the weight sequence of a plain run.
    enum Substream : std::uint16_t {
        kWeights = 0,
        kEndpoints = 1,
        kFitness = 2,
        kCoupling = 3,
        kAnalysis = 4,
    };

    Stream(std::uint64_t seed, std::uint64_t replication, std::uint16_t substream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          replication_(replication),
          substream_(substream) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (lane_ == 2) {
            refill();
        }
        return buffer_[lane_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t replication() const noexcept { return replication_; }
    std::uint16_t substream() const noexcept { return substream_; }
    std::uint64_t draws() const noexcept { return counter_; }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static void round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) noexcept {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }

    void refill() noexcept {
        std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(counter_),
            static_cast<std::uint32_t>((counter_ >> 32) & 0xFFFFu) |
                (static_cast<std::uint32_t>(substream_) << 16),
            static_cast<std::uint32_t>(replication_),
            static_cast<std::uint32_t>(replication_ >> 32),
        };
        auto key = key_;
        for (int r = 0; r < 10; ++r) {
            round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        buffer_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
        buffer_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
        ++counter_;
        lane_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t replication_;
    std::uint16_t substream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
};

}  // namespace parid
