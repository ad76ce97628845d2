#pragma once

// Deterministic random streams keyed by (master seed, trial, purpose, index).
// Any simulation quantity is a pure function of its key, so results do not
// depend on how trials are spread over workers.

#include <cstdint>
#include <random>

namespace relaychain {

using Engine = std::mt19937_64;

enum class StreamPurpose : std::uint32_t {
    field = 1,     ///< interferer positions
    fading = 2,    ///< fading and ALOHA draws of one slot
    far_field = 3, ///< interference from beyond the simulated disk
};

inline Engine make_stream(std::uint64_t master_seed, std::uint64_t trial, StreamPurpose purpose,
                          std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trial),       static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(purpose),     static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    // Condense the key to one word: seeding the engine from a seed_seq
    // directly costs hundreds of hash rounds per stream.
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return Engine((static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
}

}  // namespace relaychain
