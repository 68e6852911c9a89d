#pragma once

#include <string>

#include "linkforge/phy.hpp"

namespace linkforge {

enum class PrefClass { LowBER, HighRate, Conventional };
constexpr int kNumPrefClasses = 3;

const std::string& pref_class_name(PrefClass c);
PrefClass pref_class_from_name(const std::string& name);  // ConfigError on unknown

// Simplex weights over (reliability, throughput, complexity).
struct PreferenceVector {
    double rel = 0.0;
    double thr = 0.0;
    double cmp = 0.0;
};

struct RewardWeights {
    double ber = 0.0;
    double rate = 0.0;
    double comp = 0.0;
};

struct NormalizedMetrics {
    double ber = 0.0;
    double rate = 0.0;
    double comp = 0.0;
};

// Log-scaled BER term floored at 1e-6, goodput against the catalog-wide best
// nominal rate, complexity against the catalog-wide worst cost. Infeasible
// simulations normalize to all zeros.
NormalizedMetrics normalize_metrics(const LinkMetrics& m);
NormalizedMetrics normalize_metrics(const SimResult& sim);

// Weighted sum; throws ConfigError unless the weights sum to 1 within 1e-6.
double reward(const NormalizedMetrics& n, const RewardWeights& w);

// Floors every component at 0.05 and renormalizes; preserves the argmax.
RewardWeights pref_to_weights(const PreferenceVector& p);

PreferenceVector canonical_preference(PrefClass c);
RewardWeights class_weights(PrefClass c);  // pref_to_weights of the canonical vector

}  // namespace linkforge
