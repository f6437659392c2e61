#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rank_extremes {

/// Root seed of a simulation. Every random quantity in the toolkit is a
/// deterministic function of a root seed plus a stream path.
using RngSeed = std::uint64_t;

/// Stream splitting rule.
///
/// A child stream key is derived from a parent key and a (tag, index) pair:
///
///     child = mix64(mix64(parent ^ fnv1a(tag)) + index)
///
/// where mix64 is the SplitMix64 finaliser. Streams with different tags or
/// indices are statistically independent for simulation purposes, and the
/// derivation is platform independent.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t tag_hash(std::string_view tag) noexcept;
std::uint64_t derive_stream(std::uint64_t parent, std::string_view tag,
                            std::uint64_t index = 0) noexcept;

/// Convert 64 random bits into a double in (0, 1]. Never returns 0, so the
/// result is safe to use as a survival probability in inverse transforms.
inline double bits_to_unit_open0(std::uint64_t bits) noexcept {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Counter-based uniform: the value of stream `key` at position `t`.
/// Random access lets stationary columns be evaluated lazily at any time
/// index without materialising the whole column.
inline double counter_uniform(std::uint64_t key, std::int64_t t) noexcept {
    return bits_to_unit_open0(mix64(key + mix64(static_cast<std::uint64_t>(t))));
}

/// Sequential generator for one stream. Wraps std::mt19937_64 (whose output
/// sequence is fixed by the standard) and converts bits to doubles by hand,
/// since std::uniform_real_distribution is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t stream_key) : engine_(mix64(stream_key)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1].
    double unit() { return bits_to_unit_open0(engine_()); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

}  // namespace rank_extremes
