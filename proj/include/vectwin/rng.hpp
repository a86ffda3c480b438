#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace vectwin {

// One master seed per run, expanded into independent named streams so that
// e.g. exploration noise never perturbs the mobility sequence. Stream
// identity is (master seed, stream name), nothing positional.
namespace rng {

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
    return splitmix64(master ^ splitmix64(fnv1a(name)));
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view name) {
    return std::mt19937_64(stream_seed(master, name));
}

// mt19937_64 streams round-trip losslessly through their text form; used by
// checkpoints.
inline std::string save_state(const std::mt19937_64& g) {
    std::ostringstream os;
    os << g;
    return os.str();
}

inline void load_state(std::mt19937_64& g, const std::string& text) {
    std::istringstream is(text);
    is >> g;
    if (is.fail()) throw std::runtime_error("bad RNG state string");
}

}  // namespace rng
}  // namespace vectwin
