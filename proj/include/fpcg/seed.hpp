#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fpcg {

using Rng = std::mt19937_64;

/// Independent sub-seed for one named stream. Each generator in the pipeline
/// draws from its own stream, so enabling or disabling one never shifts the
/// random numbers seen by another.
///
///   sub = splitmix64(master ^ fnv1a64(tag))
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

/// derive_seed(master, tag) further split by an index (per-file seeds).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace fpcg
