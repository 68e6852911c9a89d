#include "linkforge/search.hpp"

#include <algorithm>

#include "linkforge/errors.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/phy.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

double evaluate_config(const LinkConfig& cfg, const ChannelRealization& ch,
                       const RewardWeights& w, const SearchBudget& budget) {
    if (budget.mc_seeds < 1) throw ConfigError("mc_seeds must be at least 1");
    double sum = 0.0;
    for (int i = 0; i < budget.mc_seeds; ++i) {
        Payload payload =
            random_payload(budget.payload_bits, mix_seed(budget.eval_seed_base, i, 1));
        SimResult sim =
            simulate_link(cfg, ch, payload, mix_seed(budget.eval_seed_base, i, 2));
        sum += reward(normalize_metrics(sim), w);
    }
    return sum / budget.mc_seeds;
}

LinkConfig random_select(uint64_t seed) {
    Rng rng(mix_seed(seed, 0x72616e64ULL));
    int flat = static_cast<int>(
        rng.uniform_int(static_cast<uint64_t>(ModuleCatalog::instance().total_configs())));
    return index_to_config(unflatten_indices(flat));
}

namespace {

struct Candidate {
    ConfigIndices idx;
    double reward = 0.0;
};

// reward descending, then lexicographic indices ascending
bool candidate_before(const Candidate& a, const Candidate& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.idx < b.idx;
}

void evaluate_all(std::vector<Candidate>& cands, const ChannelRealization& ch,
                  const RewardWeights& w, const SearchBudget& budget) {
    parallel_for(cands.size(), [&](size_t i) {
        cands[i].reward = evaluate_config(index_to_config(cands[i].idx), ch, w, budget);
    });
}

}  // namespace

SearchResult greedy_search(const ChannelRealization& ch, const RewardWeights& w,
                           const SearchBudget& budget) {
    const auto& cat = ModuleCatalog::instance();
    ConfigIndices current{};
    double best_reward = 0.0;
    for (int mod = 0; mod < kNumModules; ++mod) {
        std::vector<Candidate> cands(cat.option_count(mod));
        for (int opt = 0; opt < cat.option_count(mod); ++opt) {
            cands[opt].idx = current;
            cands[opt].idx[mod] = opt;
        }
        evaluate_all(cands, ch, w, budget);
        int best = 0;
        for (int opt = 1; opt < cat.option_count(mod); ++opt)
            if (cands[opt].reward > cands[best].reward) best = opt;
        current[mod] = best;
        best_reward = cands[best].reward;
    }
    return {index_to_config(current), best_reward};
}

SearchResult beam_search(const ChannelRealization& ch, const RewardWeights& w, int width,
                         const SearchBudget& budget) {
    if (width < 1) throw ConfigError("beam width must be at least 1");
    const auto& cat = ModuleCatalog::instance();
    std::vector<Candidate> beam(1);  // all modules at first option, nothing fixed yet
    for (int mod = 0; mod < kNumModules; ++mod) {
        std::vector<Candidate> expanded;
        expanded.reserve(beam.size() * cat.option_count(mod));
        for (const Candidate& c : beam)
            for (int opt = 0; opt < cat.option_count(mod); ++opt) {
                Candidate e;
                e.idx = c.idx;
                e.idx[mod] = opt;
                expanded.push_back(e);
            }
        evaluate_all(expanded, ch, w, budget);
        std::sort(expanded.begin(), expanded.end(), candidate_before);
        if (static_cast<int>(expanded.size()) > width) expanded.resize(width);
        beam = std::move(expanded);
    }
    return {index_to_config(beam[0].idx), beam[0].reward};
}

long long CatalogSubset::size() const {
    const auto& cat = ModuleCatalog::instance();
    long long n = 1;
    for (int mod = 0; mod < kNumModules; ++mod) {
        size_t c = options[mod].empty() ? cat.option_count(mod) : options[mod].size();
        n *= static_cast<long long>(c);
    }
    return n;
}

SearchResult exhaustive_oracle(const ChannelRealization& ch, const RewardWeights& w,
                               const CatalogSubset& subset, const SearchBudget& budget) {
    const auto& cat = ModuleCatalog::instance();
    if (subset.size() > 1000) throw ConfigError("oracle subset exceeds 1000 configs");
    std::array<std::vector<int>, kNumModules> opts;
    for (int mod = 0; mod < kNumModules; ++mod) {
        opts[mod] = subset.options[mod];
        if (opts[mod].empty())
            for (int o = 0; o < cat.option_count(mod); ++o) opts[mod].push_back(o);
        for (int o : opts[mod])
            if (o < 0 || o >= cat.option_count(mod))
                throw ConfigError("subset option index out of range");
    }
    std::vector<Candidate> cands;
    cands.reserve(static_cast<size_t>(subset.size()));
    ConfigIndices idx{};
    std::array<size_t, kNumModules> pos{};
    for (;;) {
        for (int mod = 0; mod < kNumModules; ++mod) idx[mod] = opts[mod][pos[mod]];
        cands.push_back({idx, 0.0});
        int mod = kNumModules - 1;
        while (mod >= 0 && ++pos[mod] == opts[mod].size()) pos[mod--] = 0;
        if (mod < 0) break;
    }
    evaluate_all(cands, ch, w, budget);
    size_t best = 0;
    for (size_t i = 1; i < cands.size(); ++i)
        if (candidate_before(cands[i], cands[best])) best = i;
    return {index_to_config(cands[best].idx), cands[best].reward};
}

}  // namespace linkforge
