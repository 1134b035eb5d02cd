// SPDX-License-Identifier: MIT

/**
 * Deterministic seed derivation for randomized suites.
 *
 * Every randomized experiment derives per-run seeds from a single master
 * seed with a counter, so adding or reordering runs never perturbs the
 * streams of unrelated runs and reruns are bit-reproducible.
 */

#ifndef DSTEP_SEEDING_HPP
#define DSTEP_SEEDING_HPP

#include <cstdint>

namespace dstep {

/** splitmix64 finalizer: a well-mixed 64-bit hash of (master, index). */
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace dstep

#endif  // DSTEP_SEEDING_HPP
