#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "linkforge/action_space.hpp"
#include "linkforge/channel.hpp"
#include "linkforge/reward.hpp"

namespace linkforge {

struct SearchBudget {
    int mc_seeds = 20;      // Monte-Carlo repetitions per candidate
    uint64_t eval_seed_base = 0;
    int payload_bits = 1024;
};

// Mean reward over budget.mc_seeds paired simulations. Every candidate under
// the same budget sees identical payloads and noise seeds, so comparisons
// between configs are noise-paired.
double evaluate_config(const LinkConfig& cfg, const ChannelRealization& ch,
                       const RewardWeights& w, const SearchBudget& budget);

struct SearchResult {
    LinkConfig config;
    double reward = 0.0;
};

// Uniform draw over the full strategy space.
LinkConfig random_select(uint64_t seed);

// Fixes one module at a time in catalog order; evaluates every option with the
// other modules held at their current values (first option until visited) and
// keeps the argmax, lowest option index on ties.
SearchResult greedy_search(const ChannelRealization& ch, const RewardWeights& w,
                           const SearchBudget& budget);

// Same expansion order, keeping the `width` best partial configurations at
// each step. Unset modules evaluate at their first option; ties break by
// lexicographic index order. width=1 reproduces greedy_search exactly.
SearchResult beam_search(const ChannelRealization& ch, const RewardWeights& w, int width,
                         const SearchBudget& budget);

// Allowed option indices per module; empty list = every option.
struct CatalogSubset {
    std::array<std::vector<int>, kNumModules> options;

    long long size() const;
};

// Full scan of a restricted catalog (at most 1000 configs) under the same
// evaluation seeds as the other searches.
SearchResult exhaustive_oracle(const ChannelRealization& ch, const RewardWeights& w,
                               const CatalogSubset& subset, const SearchBudget& budget);

}  // namespace linkforge
