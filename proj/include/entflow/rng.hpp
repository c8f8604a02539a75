// Copyright 2026 The entflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace entflow {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of stream `index` under `master`. Streams are independent of the
/// order in which they are requested, so parallel runs reproduce serial ones.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
    return Rng(stream_seed(master, index));
}

}  // namespace entflow
