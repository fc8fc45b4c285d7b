#pragma once

#include <cmath>
#include <cstdint>

namespace critbatch {

// Counter-based generator. Every random value consumed anywhere in the
// library is a pure function of (seed, w0, w1, w2, w3), so runs are
// reproducible at any parallelism width and independent of scheduling order.
//
// Contract (relied on by trajectory-replay tests, do not change silently):
//   mix64    : the SplitMix64 finalizer
//   hash4    : h = seed + 0x9e3779b97f4a7c15, then h = mix64(h + w) for each word
//   u01      : (bits >> 11) * 2^-53                    in [0, 1)
//   u01_open : ((bits >> 11) + 1) * 2^-53              in (0, 1]
//   gauss    : sqrt(-2 ln u1) * cos(2 pi u2), u1 open, u2 half-open
//   index    : (bits * n) >> 64 via 128-bit product    in [0, n)
//
// Word layout per stream (w3 is the stream tag, part in {0, 1} selects the
// two words feeding one gaussian):
//   component draw i of step k, trial t       (t, k, i, 1)
//   additive-noise coordinate j, step k       (t, k, 2j, 2) and (t, k, 2j+1, 2)
//   quadratic centers, entry (i, j)           (i, j, part, 3)
//   default initial point, coordinate j       (j, 0, part, 4)
//   logistic features / label noise           (i, j, part, 5) / (i, 1, part, 6)
//   logistic label direction, coordinate j    (j, 0, part, 6)
//   logistic variance probes                  (p, j, part, 7)

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash4(std::uint64_t seed, std::uint64_t w0, std::uint64_t w1,
                           std::uint64_t w2, std::uint64_t w3) {
  std::uint64_t h = seed + kGolden;
  h = mix64(h + w0);
  h = mix64(h + w1);
  h = mix64(h + w2);
  h = mix64(h + w3);
  return h;
}

inline double u01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double u01_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double gauss(std::uint64_t bits1, std::uint64_t bits2) {
  const double r = std::sqrt(-2.0 * std::log(u01_open(bits1)));
  const double phi = 2.0 * 3.14159265358979323846 * u01(bits2);
  return r * std::cos(phi);
}

/// Uniform index in [0, n) by the 128-bit multiply reduction.
inline std::uint64_t uniform_index(std::uint64_t bits, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(bits) * static_cast<unsigned __int128>(n)) >> 64);
}

}  // namespace critbatch
