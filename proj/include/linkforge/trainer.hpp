#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "linkforge/nn/adam.hpp"
#include "linkforge/policy.hpp"
#include "linkforge/search.hpp"

namespace linkforge {

std::vector<double> default_snr_grid();  // -5 to 20 dB in 2.5 dB steps

struct Experience {
    std::string scenario;
    double snr_db = 0.0;
    uint64_t channel_seed = 0;
    uint64_t eval_seed_base = 0;  // pins the paired reward evaluation
    PrefClass cls = PrefClass::Conventional;
    CsiFeatures csi;
    std::string intent_text;
    std::vector<int> tokens;  // always tokenize(intent_text)
    ConfigIndices action{};
    double reward = 0.0;
};

// Greedy-search labels over states stratified class-major, then scenario,
// then SNR grid point, with reward weights taken from the true class. Stored
// rewards replay exactly from (scenario, snr_db, channel_seed, eval_seed_base).
std::vector<Experience> collect_expert(int n_samples, const SearchBudget& budget, uint64_t seed);

struct TrainConfig {
    int expert_samples = 5000;
    int bc_epochs = 10;
    int rl_steps = 5000;
    int batch_size = 32;
    double lr = 1e-3;             // behavior-cloning stage
    double rl_lr = 1e-4;          // fine-tuning stage
    double lambda_start = 1.0;    // imitation-anchor weight, annealed linearly
    double lambda_end = 0.1;
    double entropy_coef = 0.01;
    double baseline_decay = 0.9;
    uint64_t seed = 1;
    SearchBudget budget;          // expert collection
    int rl_mc_seeds = 4;          // reward averaging during fine-tuning
    std::string checkpoint_path;  // empty = keep weights in memory only
    int checkpoint_every = 0;     // fine-tuning steps between saves, 0 = final only
};

// Two stages: behavior cloning on the expert buffer (action NLL + preference
// CE), then REINFORCE with a per-class EMA baseline, an entropy bonus, the
// preference CE, and a linearly annealed imitation anchor. One optimizer step
// per batch; all gradient accumulation runs in sample order, so training is
// reproducible to identical metric logs.
class Trainer {
public:
    Trainer(PolicyNet& net, const TrainConfig& cfg);

    void set_buffer(std::vector<Experience> buffer);
    const std::vector<Experience>& buffer() const { return buffer_; }

    double bc_loss(const std::vector<Experience>& batch);    // forward-only diagnostics
    double pref_loss(const std::vector<Experience>& batch);

    void run_bc();
    void rl_step(int step_index);
    void run_rl();
    void train();  // collect (when the buffer is empty) + both stages + save

    const std::string& metrics() const { return log_; }
    const std::array<double, kNumPrefClasses>& baselines() const { return baseline_; }

    // Test hook: replaces simulation-based reward during fine-tuning.
    using RewardFn = std::function<double(const ConfigIndices& action, PrefClass cls, int sample)>;
    void set_reward_override(RewardFn fn) { reward_override_ = std::move(fn); }

    double lambda_at(int step_index) const;

private:
    void log_record(const char* stage, double l_bc, double l_pref, double j, double mean_reward,
                    double pref_acc, double lambda);

    PolicyNet* net_;
    TrainConfig cfg_;
    nn::Adam adam_;
    std::vector<Experience> buffer_;
    std::array<double, kNumPrefClasses> baseline_{};
    std::array<bool, kNumPrefClasses> baseline_ready_{};
    std::string log_;
    int global_step_ = 0;
    RewardFn reward_override_;
};

}  // namespace linkforge
