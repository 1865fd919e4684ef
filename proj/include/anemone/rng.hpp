#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace anemone {

using Rng = std::mt19937_64;

// Stream tags. Every random draw in the pipeline comes from a generator whose
// seed is derived from (master seed, tag, indices), so results never depend on
// the order in which work is scheduled.
namespace stream {
inline constexpr std::string_view kInject = "inject";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kShuffle = "shuffle";
inline constexpr std::string_view kPatchView = "view-patch";
inline constexpr std::string_view kContextView = "view-context";
inline constexpr std::string_view kPartner = "partner";
inline constexpr std::string_view kTrain = "train";
inline constexpr std::string_view kScore = "score";
inline constexpr std::string_view kSplit = "split";
}  // namespace stream

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::string_view tag, std::uint64_t a = 0,
                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng(derive_seed(master, tag, a, b, c));
}

}  // namespace anemone
