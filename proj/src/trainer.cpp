#include "linkforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"
#include "linkforge/phy.hpp"

namespace linkforge {

std::vector<double> default_snr_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(-5.0 + 2.5 * i);
    return grid;
}

namespace {

Experience make_state(PrefClass cls, const Scenario& sc, double snr_db, uint64_t channel_seed,
                      uint64_t intent_seed) {
    Experience e;
    e.scenario = sc.name;
    e.snr_db = snr_db;
    e.channel_seed = channel_seed;
    e.cls = cls;
    e.csi = csi_features(generate_channel(sc, snr_db, channel_seed));
    IntentSample intent = generate_intent(cls, sc, intent_seed);
    e.intent_text = std::move(intent.text);
    e.tokens = std::move(intent.tokens);
    return e;
}

}  // namespace

std::vector<Experience> collect_expert(int n_samples, const SearchBudget& budget, uint64_t seed) {
    const auto& scenarios = builtin_scenarios();
    const auto grid = default_snr_grid();
    std::vector<Experience> buffer;
    buffer.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        PrefClass cls = static_cast<PrefClass>(i % kNumPrefClasses);
        const Scenario& sc = scenarios[(i / kNumPrefClasses) % scenarios.size()];
        double snr = grid[(i / (kNumPrefClasses * static_cast<int>(scenarios.size()))) % grid.size()];
        Experience e = make_state(cls, sc, snr, mix_seed(seed, i, 11), mix_seed(seed, i, 12));

        SearchBudget b = budget;
        b.eval_seed_base = mix_seed(seed, i, 13);
        e.eval_seed_base = b.eval_seed_base;
        ChannelRealization ch = generate_channel(sc, snr, e.channel_seed);
        SearchResult res = greedy_search(ch, class_weights(cls), b);
        e.action = config_to_index(res.config);
        e.reward = res.reward;
        buffer.push_back(std::move(e));
    }
    return buffer;
}

Trainer::Trainer(PolicyNet& net, const TrainConfig& cfg)
    : net_(&net), cfg_(cfg), adam_(net.params(), cfg.lr) {
    if (cfg_.bc_epochs < 1 || cfg_.rl_steps < 1 || cfg_.batch_size < 1 ||
        cfg_.expert_samples < 1)
        throw ConfigError("training counts must be at least 1");
    if (cfg_.lambda_start < 0.0 || cfg_.lambda_start > 1.0 || cfg_.lambda_end < 0.0 ||
        cfg_.lambda_end > 1.0)
        throw ConfigError("lambda schedule must stay within [0,1]");
    log_ = "step,stage,L_BC,L_pref,J,mean_reward,pref_acc,lambda\n";
}

void Trainer::set_buffer(std::vector<Experience> buffer) { buffer_ = std::move(buffer); }

double Trainer::bc_loss(const std::vector<Experience>& batch) {
    if (batch.empty()) throw ConfigError("loss over an empty batch");
    double sum = 0.0;
    for (const Experience& e : batch) sum += -net_->forward(e.csi, e.tokens).log_prob(e.action);
    return sum / batch.size();
}

double Trainer::pref_loss(const std::vector<Experience>& batch) {
    if (batch.empty()) throw ConfigError("loss over an empty batch");
    double sum = 0.0;
    for (const Experience& e : batch) {
        PolicyOutput out = net_->forward(e.csi, e.tokens);
        const double p[3] = {out.p_hat.rel, out.p_hat.thr, out.p_hat.cmp};
        sum += -std::log(std::max(p[static_cast<int>(e.cls)], 1e-300));
    }
    return sum / batch.size();
}

double Trainer::lambda_at(int step_index) const {
    const double frac =
        static_cast<double>(step_index) / std::max(1, cfg_.rl_steps - 1);
    return cfg_.lambda_start + (cfg_.lambda_end - cfg_.lambda_start) * frac;
}

void Trainer::log_record(const char* stage, double l_bc, double l_pref, double j,
                         double mean_reward, double pref_acc, double lambda) {
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", global_step_,
                  stage, l_bc, l_pref, j, mean_reward, pref_acc, lambda);
    log_ += line;
    ++global_step_;
}

void Trainer::run_bc() {
    if (buffer_.empty()) throw ConfigError("behavior cloning needs a collected buffer");
    adam_.set_lr(cfg_.lr);
    std::vector<size_t> order(buffer_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < cfg_.bc_epochs; ++epoch) {
        Rng shuffle(mix_seed(cfg_.seed, 1000, epoch));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle.uniform_int(i)]);
        for (size_t start = 0; start < order.size(); start += cfg_.batch_size) {
            const size_t n = std::min(order.size() - start, static_cast<size_t>(cfg_.batch_size));
            double l_bc = 0.0, l_pref = 0.0, mean_r = 0.0;
            int pref_hits = 0;
            for (size_t k = 0; k < n; ++k) {
                const Experience& e = buffer_[order[start + k]];
                LossTerms t = net_->accumulate_gradients(e.csi, e.tokens, e.action, e.cls,
                                                         1.0 / n, 1.0 / n, 0.0);
                l_bc += t.nll_action / n;
                l_pref += t.ce_pref / n;
                mean_r += e.reward / n;
                pref_hits += t.pref_argmax == static_cast<int>(e.cls) ? 1 : 0;
            }
            adam_.step();
            log_record("bc", l_bc, l_pref, 0.0, mean_r, static_cast<double>(pref_hits) / n, 1.0);
        }
    }
}

void Trainer::rl_step(int step_index) {
    if (buffer_.empty()) throw ConfigError("fine-tuning needs a collected buffer");
    const auto& scenarios = builtin_scenarios();
    const auto grid = default_snr_grid();
    const int n = cfg_.batch_size;
    const double lambda = lambda_at(step_index);

    struct Rollout {
        Experience state;
        ChannelRealization ch;
        ConfigIndices action{};
        double reward = 0.0;
        double advantage = 0.0;
    };
    std::vector<Rollout> batch;
    batch.reserve(static_cast<size_t>(n));

    Rng state_rng(mix_seed(cfg_.seed, 2000, step_index));
    for (int i = 0; i < n; ++i) {
        Rollout r;
        PrefClass cls = static_cast<PrefClass>(i % kNumPrefClasses);
        const Scenario& sc = scenarios[state_rng.uniform_int(scenarios.size())];
        const double snr = grid[state_rng.uniform_int(grid.size())];
        const uint64_t ch_seed = state_rng.next_u64();
        const uint64_t it_seed = state_rng.next_u64();
        r.state = make_state(cls, sc, snr, ch_seed, it_seed);
        r.ch = generate_channel(sc, snr, ch_seed);
        batch.push_back(std::move(r));
    }

    Rng action_rng(mix_seed(cfg_.seed, 3000, step_index));
    for (int i = 0; i < n; ++i) {
        Rollout& r = batch[i];
        PolicyOutput out = net_->forward(r.state.csi, r.state.tokens);
        r.action = sample_action(out, action_rng);
        if (reward_override_) {
            r.reward = reward_override_(r.action, r.state.cls, i);
        } else {
            SearchBudget b;
            b.mc_seeds = cfg_.rl_mc_seeds;
            b.payload_bits = cfg_.budget.payload_bits;
            b.eval_seed_base = mix_seed(cfg_.seed, 4000, step_index, i);
            r.reward = evaluate_config(index_to_config(r.action), r.ch,
                                       class_weights(r.state.cls), b);
        }
    }

    // Advantages against the per-class running baseline; a class seen for the
    // first time is centered on its own batch mean.
    std::array<double, kNumPrefClasses> class_sum{};
    std::array<int, kNumPrefClasses> class_count{};
    for (const Rollout& r : batch) {
        class_sum[static_cast<int>(r.state.cls)] += r.reward;
        ++class_count[static_cast<int>(r.state.cls)];
    }
    std::array<double, kNumPrefClasses> base_used = baseline_;
    for (int c = 0; c < kNumPrefClasses; ++c) {
        if (class_count[c] == 0) continue;
        const double batch_mean = class_sum[c] / class_count[c];
        if (!baseline_ready_[c]) {
            base_used[c] = batch_mean;
            baseline_[c] = batch_mean;
            baseline_ready_[c] = true;
        } else {
            base_used[c] = baseline_[c];
            baseline_[c] = cfg_.baseline_decay * baseline_[c] +
                           (1.0 - cfg_.baseline_decay) * batch_mean;
        }
    }
    for (Rollout& r : batch) r.advantage = r.reward - base_used[static_cast<int>(r.state.cls)];

    double l_pref = 0.0, j_est = 0.0, mean_r = 0.0;
    int pref_hits = 0;
    for (int i = 0; i < n; ++i) {
        const Rollout& r = batch[i];
        LossTerms t = net_->accumulate_gradients(r.state.csi, r.state.tokens, r.action,
                                                 r.state.cls, r.advantage / n, 1.0 / n,
                                                 -cfg_.entropy_coef / n);
        l_pref += t.ce_pref / n;
        j_est += r.advantage * (-t.nll_action) / n;
        mean_r += r.reward / n;
        pref_hits += t.pref_argmax == static_cast<int>(r.state.cls) ? 1 : 0;
    }

    // imitation anchor from the expert buffer, annealed by lambda
    Rng anchor_rng(mix_seed(cfg_.seed, 5000, step_index));
    double l_bc = 0.0;
    for (int i = 0; i < n; ++i) {
        const Experience& e = buffer_[anchor_rng.uniform_int(buffer_.size())];
        LossTerms t =
            net_->accumulate_gradients(e.csi, e.tokens, e.action, e.cls, lambda / n, 0.0, 0.0);
        l_bc += t.nll_action / n;
    }

    adam_.step();
    log_record("rl", l_bc, l_pref, j_est, mean_r, static_cast<double>(pref_hits) / n, lambda);
}

void Trainer::run_rl() {
    adam_.set_lr(cfg_.rl_lr);
    for (int s = 0; s < cfg_.rl_steps; ++s) {
        rl_step(s);
        if (!cfg_.checkpoint_path.empty() && cfg_.checkpoint_every > 0 &&
            (s + 1) % cfg_.checkpoint_every == 0)
            net_->save(cfg_.checkpoint_path + ".step" + std::to_string(s + 1));
    }
}

void Trainer::train() {
    if (buffer_.empty()) set_buffer(collect_expert(cfg_.expert_samples, cfg_.budget, cfg_.seed));
    run_bc();
    if (!cfg_.checkpoint_path.empty()) net_->save(cfg_.checkpoint_path + ".bc");
    run_rl();
    if (!cfg_.checkpoint_path.empty()) net_->save(cfg_.checkpoint_path);
}

}  // namespace linkforge
