#include "linkforge/reward.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "linkforge/errors.hpp"

namespace linkforge {

const std::string& pref_class_name(PrefClass c) {
    static const std::array<std::string, 3> names = {"low_ber", "high_rate", "conventional"};
    return names[static_cast<int>(c)];
}

PrefClass pref_class_from_name(const std::string& name) {
    for (int i = 0; i < kNumPrefClasses; ++i) {
        PrefClass c = static_cast<PrefClass>(i);
        if (pref_class_name(c) == name) return c;
    }
    throw ConfigError("unknown preference class: " + name);
}

NormalizedMetrics normalize_metrics(const LinkMetrics& m) {
    NormalizedMetrics n;
    n.ber = std::clamp(-std::log10(std::max(m.ber, 1e-6)) / 6.0, 0.0, 1.0);
    n.rate = std::clamp(m.goodput / rate_max(), 0.0, 1.0);
    n.comp = std::clamp(1.0 - m.complexity / complexity_max(), 0.0, 1.0);
    return n;
}

NormalizedMetrics normalize_metrics(const SimResult& sim) {
    if (sim.status == SimStatus::Infeasible) return {};
    return normalize_metrics(sim.metrics);
}

double reward(const NormalizedMetrics& n, const RewardWeights& w) {
    if (w.ber < 0 || w.rate < 0 || w.comp < 0 ||
        std::abs(w.ber + w.rate + w.comp - 1.0) > 1e-6)
        throw ConfigError("reward weights must lie on the simplex");
    return w.ber * n.ber + w.rate * n.rate + w.comp * n.comp;
}

RewardWeights pref_to_weights(const PreferenceVector& p) {
    constexpr double kEps = 0.05;
    double a = std::max(p.rel, kEps);
    double b = std::max(p.thr, kEps);
    double c = std::max(p.cmp, kEps);
    double s = a + b + c;
    return {a / s, b / s, c / s};
}

PreferenceVector canonical_preference(PrefClass c) {
    switch (c) {
        case PrefClass::LowBER: return {0.8, 0.1, 0.1};
        case PrefClass::HighRate: return {0.1, 0.8, 0.1};
        case PrefClass::Conventional: return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    }
    throw ConfigError("unknown preference class");
}

RewardWeights class_weights(PrefClass c) { return pref_to_weights(canonical_preference(c)); }

}  // namespace linkforge
