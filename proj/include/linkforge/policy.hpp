#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "linkforge/action_space.hpp"
#include "linkforge/channel.hpp"
#include "linkforge/nn/graph.hpp"
#include "linkforge/reward.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

constexpr int kModelDim = 64;

struct PolicyOutput {
    std::array<std::vector<double>, kNumModules> dists;
    PreferenceVector p_hat;
    std::vector<double> pooled;  // mean-pooled backbone state, kModelDim wide

    double log_prob(const ConfigIndices& idx) const;
};

struct LossTerms {
    double nll_action = 0.0;  // -log pi(action)
    double ce_pref = 0.0;     // -log p_hat[class]
    double entropy = 0.0;     // summed over the eight heads
    double loss = 0.0;        // c_logp*nll + c_pref*ce + c_ent*entropy
    int pref_argmax = 0;      // predicted class, for accuracy logging
};

// CSI row encoder and token embedding feed a connector (sequence-axis
// projection to 8 rows, self-attention, CSI-queried cross-attention), a
// 2-block pre-norm transformer over the 32 concatenated rows, a 3-way
// preference head, and one softmax head per chain module. The whole network
// lives on a single static graph built once per instance; preference and
// actor heads start at zero so every distribution begins exactly uniform.
class PolicyNet {
public:
    explicit PolicyNet(uint64_t init_seed = 1);
    PolicyNet(const PolicyNet&) = delete;
    PolicyNet& operator=(const PolicyNet&) = delete;

    PolicyOutput forward(const CsiFeatures& csi, const std::vector<int>& tokens);

    // One training sample: forward plus backward of
    //   loss = c_logp * (-log pi(action)) + c_pref * CE(p_hat, cls) + c_ent * H.
    // Parameter gradients accumulate until the optimizer consumes them.
    LossTerms accumulate_gradients(const CsiFeatures& csi, const std::vector<int>& tokens,
                                   const ConfigIndices& action, PrefClass cls, double c_logp,
                                   double c_pref, double c_ent);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    int op_count() const { return graph_.op_count(); }

    // Versioned binary of named arrays, guarded by the catalog fingerprint.
    void save(const std::string& path) const;
    void load(const std::string& path);

private:
    void build(uint64_t init_seed);
    void set_state(const CsiFeatures& csi, const std::vector<int>& tokens);
    PolicyOutput read_output() const;

    nn::ParamStore params_;
    nn::Graph graph_;

    nn::Graph::Id in_csi_, in_mask_, in_tokens_, in_action_, in_class_;
    nn::Graph::Id in_c_logp_, in_c_pref_, in_c_ent_;
    nn::Graph::Id out_pooled_, out_p_hat_;
    std::array<nn::Graph::Id, kNumModules> out_dists_;
    nn::Graph::Id out_nll_, out_ce_, out_ent_, out_loss_;
};

ConfigIndices sample_action(const PolicyOutput& out, Rng& rng, double* log_prob = nullptr);
ConfigIndices greedy_action(const PolicyOutput& out);

}  // namespace linkforge
