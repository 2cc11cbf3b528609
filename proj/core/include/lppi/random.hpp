#pragma once

#include <cstdint>
#include <string_view>

namespace lppi {

/// Named random substreams derived from one user seed.
enum class Stream : std::uint64_t {
    clustering = 1,
    desk_fit = 2,
    bootstrap = 3,
    simulation = 4,
};

/// splitmix64 finaliser.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
{
    return mix_seed(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(stream))) + index);
}

} // namespace lppi
