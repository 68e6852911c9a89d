#include "linkforge/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"

namespace linkforge {

namespace {

constexpr int kHeads = 4;
constexpr int kHeadDim = kModelDim / kHeads;
constexpr int kFF = 4 * kModelDim;
constexpr int kConnectorRows = 8;
constexpr uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[4] = {'L', 'F', 'P', 'C'};

void init_uniform(nn::Tensor* t, Rng& rng, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t->v) v = rng.uniform(-a, a);
}

void init_gauss(nn::Tensor* t, Rng& rng, double scale) {
    for (double& v : t->v) v = scale * rng.gauss();
}

void init_const(nn::Tensor* t, double value) {
    for (double& v : t->v) v = value;
}

}  // namespace

double PolicyOutput::log_prob(const ConfigIndices& idx) const {
    double lp = 0.0;
    for (int m = 0; m < kNumModules; ++m) lp += std::log(dists[m][idx[m]]);
    return lp;
}

PolicyNet::PolicyNet(uint64_t init_seed) { build(init_seed); }

void PolicyNet::build(uint64_t init_seed) {
    const auto& cat = ModuleCatalog::instance();
    Rng rng(mix_seed(init_seed, 0x706f6c69ULL));

    auto* csi_w = params_.add("csi_w", kCsiCols, kModelDim);
    auto* csi_b = params_.add("csi_b", 1, kModelDim);
    auto* csi_pos = params_.add("csi_pos", kGridTime, kModelDim);
    auto* tok_emb = params_.add("tok_emb", kVocabSize, kModelDim);
    auto* tok_pos = params_.add("tok_pos", kMaxTokens, kModelDim);
    auto* conn_proj = params_.add("conn_proj", kConnectorRows, kMaxTokens);
    auto* sa_wq = params_.add("conn_sa_wq", kModelDim, kModelDim);
    auto* sa_wk = params_.add("conn_sa_wk", kModelDim, kModelDim);
    auto* sa_wv = params_.add("conn_sa_wv", kModelDim, kModelDim);
    auto* ca_wq = params_.add("conn_ca_wq", kModelDim, kModelDim);
    auto* ca_wk = params_.add("conn_ca_wk", kModelDim, kModelDim);
    auto* ca_wv = params_.add("conn_ca_wv", kModelDim, kModelDim);

    struct BlockParams {
        nn::Tensor *ln1_g, *ln1_b, *wq, *wk, *wv, *wo, *ln2_g, *ln2_b, *w1, *b1, *w2, *b2;
    };
    std::array<BlockParams, 2> blocks;
    for (int b = 0; b < 2; ++b) {
        std::string p = "block" + std::to_string(b) + "_";
        blocks[b] = {params_.add(p + "ln1_g", 1, kModelDim), params_.add(p + "ln1_b", 1, kModelDim),
                     params_.add(p + "attn_wq", kModelDim, kModelDim),
                     params_.add(p + "attn_wk", kModelDim, kModelDim),
                     params_.add(p + "attn_wv", kModelDim, kModelDim),
                     params_.add(p + "attn_wo", kModelDim, kModelDim),
                     params_.add(p + "ln2_g", 1, kModelDim), params_.add(p + "ln2_b", 1, kModelDim),
                     params_.add(p + "ff_w1", kModelDim, kFF), params_.add(p + "ff_b1", 1, kFF),
                     params_.add(p + "ff_w2", kFF, kModelDim), params_.add(p + "ff_b2", 1, kModelDim)};
    }
    auto* fin_g = params_.add("final_ln_g", 1, kModelDim);
    auto* fin_b = params_.add("final_ln_b", 1, kModelDim);
    auto* pref_w = params_.add("pref_w", kModelDim, kNumPrefClasses);
    auto* pref_b = params_.add("pref_b", 1, kNumPrefClasses);
    std::array<nn::Tensor*, kNumModules> head_w, head_b;
    for (int m = 0; m < kNumModules; ++m) {
        std::string p = "head" + std::to_string(m) + "_";
        head_w[m] = params_.add(p + "w", kModelDim + kNumPrefClasses, cat.option_count(m));
        head_b[m] = params_.add(p + "b", 1, cat.option_count(m));
    }

    init_uniform(csi_w, rng, kCsiCols, kModelDim);
    init_const(csi_b, 0.0);
    init_gauss(csi_pos, rng, 0.01);
    init_gauss(tok_emb, rng, 0.02);
    init_gauss(tok_pos, rng, 0.01);
    init_uniform(conn_proj, rng, kMaxTokens, kConnectorRows);
    for (auto* t : {sa_wq, sa_wk, sa_wv, ca_wq, ca_wk, ca_wv})
        init_uniform(t, rng, kModelDim, kModelDim);
    for (auto& b : blocks) {
        init_const(b.ln1_g, 1.0);
        init_const(b.ln1_b, 0.0);
        for (auto* t : {b.wq, b.wk, b.wv, b.wo}) init_uniform(t, rng, kModelDim, kModelDim);
        init_const(b.ln2_g, 1.0);
        init_const(b.ln2_b, 0.0);
        init_uniform(b.w1, rng, kModelDim, kFF);
        init_const(b.b1, 0.0);
        init_uniform(b.w2, rng, kFF, kModelDim);
        init_const(b.b2, 0.0);
    }
    init_const(fin_g, 1.0);
    init_const(fin_b, 0.0);
    // zero heads: the untrained policy is exactly uniform over options/classes
    init_const(pref_w, 0.0);
    init_const(pref_b, 0.0);
    for (int m = 0; m < kNumModules; ++m) {
        init_const(head_w[m], 0.0);
        init_const(head_b[m], 0.0);
    }

    auto& g = graph_;
    in_csi_ = g.input(kGridTime, kCsiCols);
    in_mask_ = g.input(kMaxTokens, 1);
    in_tokens_ = g.iinput(kMaxTokens);
    in_action_ = g.iinput(kNumModules);
    in_class_ = g.iinput(1);
    in_c_logp_ = g.input(1, 1);
    in_c_pref_ = g.input(1, 1);
    in_c_ent_ = g.input(1, 1);

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(kModelDim));
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(kHeadDim));

    // CSI rows -> model space, plus learned positions
    auto y_csi = g.add(g.add_row(g.matmul(in_csi_, g.param(csi_w)), g.param(csi_b)),
                       g.param(csi_pos));

    // token embeddings, positions, pad rows zeroed before the connector
    auto t_text = g.add(g.gather_rows(g.param(tok_emb), in_tokens_), g.param(tok_pos));
    auto t_masked = g.scale_rows(t_text, in_mask_);

    // connector: sequence-axis projection, self-attention, cross-attention
    auto z = g.matmul(g.param(conn_proj), t_masked);
    auto sq = g.matmul(z, g.param(sa_wq));
    auto sk = g.matmul(z, g.param(sa_wk));
    auto sv = g.matmul(z, g.param(sa_wv));
    auto sattn = g.softmax_rows(g.scale(g.matmul_nt(sq, sk), inv_sqrt_d));
    auto z2 = g.matmul(sattn, sv);
    auto cq = g.matmul(y_csi, g.param(ca_wq));
    auto ck = g.matmul(z2, g.param(ca_wk));
    auto cv = g.matmul(z2, g.param(ca_wv));
    auto cattn = g.softmax_rows(g.scale(g.matmul_nt(cq, ck), inv_sqrt_d));
    auto y_text = g.matmul(cattn, cv);

    // backbone over [text; csi]
    auto x = g.concat_rows({y_text, y_csi});
    for (int b = 0; b < 2; ++b) {
        const auto& bp = blocks[b];
        auto h = g.layer_norm(x, g.param(bp.ln1_g), g.param(bp.ln1_b));
        auto q = g.matmul(h, g.param(bp.wq));
        auto k = g.matmul(h, g.param(bp.wk));
        auto v = g.matmul(h, g.param(bp.wv));
        std::vector<nn::Graph::Id> heads;
        for (int hd = 0; hd < kHeads; ++hd) {
            auto qh = g.slice_cols(q, hd * kHeadDim, kHeadDim);
            auto kh = g.slice_cols(k, hd * kHeadDim, kHeadDim);
            auto vh = g.slice_cols(v, hd * kHeadDim, kHeadDim);
            auto ah = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), inv_sqrt_hd));
            heads.push_back(g.matmul(ah, vh));
        }
        auto attn_out = g.matmul(g.concat_cols(heads), g.param(bp.wo));
        x = g.add(x, attn_out);
        auto h2 = g.layer_norm(x, g.param(bp.ln2_g), g.param(bp.ln2_b));
        auto ff = g.add_row(
            g.matmul(g.relu(g.add_row(g.matmul(h2, g.param(bp.w1)), g.param(bp.b1))),
                     g.param(bp.w2)),
            g.param(bp.b2));
        x = g.add(x, ff);
    }
    auto y_llm = g.layer_norm(x, g.param(fin_g), g.param(fin_b));
    out_pooled_ = g.mean_rows(y_llm);

    // chain-of-thought intermediate: preference distribution
    auto pref_logits = g.add_row(g.matmul(out_pooled_, g.param(pref_w)), g.param(pref_b));
    out_p_hat_ = g.softmax_rows(pref_logits);
    auto pref_logp = g.log_softmax_rows(pref_logits);
    out_ce_ = g.scale(g.pick(pref_logp, in_class_, 0), -1.0);

    // actors conditioned on pooled state + predicted preference
    auto actor_in = g.concat_cols({out_pooled_, out_p_hat_});
    nn::Graph::Id lp_sum = -1;
    nn::Graph::Id ent_sum = -1;
    for (int m = 0; m < kNumModules; ++m) {
        auto logits = g.add_row(g.matmul(actor_in, g.param(head_w[m])), g.param(head_b[m]));
        out_dists_[m] = g.softmax_rows(logits);
        auto logp = g.log_softmax_rows(logits);
        auto lp = g.pick(logp, in_action_, m);
        auto ent = g.scale(g.sum(g.mul(out_dists_[m], logp)), -1.0);
        lp_sum = m == 0 ? lp : g.add(lp_sum, lp);
        ent_sum = m == 0 ? ent : g.add(ent_sum, ent);
    }
    out_nll_ = g.scale(lp_sum, -1.0);
    out_ent_ = ent_sum;
    out_loss_ = g.add(g.add(g.mul(in_c_logp_, out_nll_), g.mul(in_c_pref_, out_ce_)),
                      g.mul(in_c_ent_, out_ent_));
}

void PolicyNet::set_state(const CsiFeatures& csi, const std::vector<int>& tokens) {
    if (csi.m.size() != static_cast<size_t>(kGridTime) * kCsiCols)
        throw ConfigError("csi feature shape mismatch");
    if (tokens.size() != static_cast<size_t>(kMaxTokens))
        throw ConfigError("token sequence must be padded to 32");
    std::vector<double> mask(kMaxTokens);
    for (int i = 0; i < kMaxTokens; ++i) {
        if (tokens[i] < 0 || tokens[i] >= kVocabSize)
            throw ConfigError("token id out of range");
        mask[i] = tokens[i] == kPadId ? 0.0 : 1.0;
    }
    graph_.set_input_float(in_csi_, csi.m);
    graph_.set_input(in_mask_, mask);
    graph_.set_iinput(in_tokens_, tokens);
}

PolicyOutput PolicyNet::read_output() const {
    PolicyOutput out;
    for (int m = 0; m < kNumModules; ++m) out.dists[m] = graph_.values(out_dists_[m]);
    const auto& p = graph_.values(out_p_hat_);
    out.p_hat = {p[0], p[1], p[2]};
    out.pooled = graph_.values(out_pooled_);
    return out;
}

PolicyOutput PolicyNet::forward(const CsiFeatures& csi, const std::vector<int>& tokens) {
    set_state(csi, tokens);
    graph_.set_iinput(in_action_, std::vector<int>(kNumModules, 0));
    graph_.set_iinput(in_class_, {0});
    graph_.set_scalar(in_c_logp_, 0.0);
    graph_.set_scalar(in_c_pref_, 0.0);
    graph_.set_scalar(in_c_ent_, 0.0);
    graph_.forward();
    return read_output();
}

LossTerms PolicyNet::accumulate_gradients(const CsiFeatures& csi, const std::vector<int>& tokens,
                                          const ConfigIndices& action, PrefClass cls,
                                          double c_logp, double c_pref, double c_ent) {
    const auto& cat = ModuleCatalog::instance();
    std::vector<int> act(kNumModules);
    for (int m = 0; m < kNumModules; ++m) {
        if (action[m] < 0 || action[m] >= cat.option_count(m))
            throw ConfigError("action option out of range");
        act[m] = action[m];
    }
    set_state(csi, tokens);
    graph_.set_iinput(in_action_, act);
    graph_.set_iinput(in_class_, {static_cast<int>(cls)});
    graph_.set_scalar(in_c_logp_, c_logp);
    graph_.set_scalar(in_c_pref_, c_pref);
    graph_.set_scalar(in_c_ent_, c_ent);
    graph_.forward();
    graph_.backward(out_loss_);

    LossTerms t;
    t.nll_action = graph_.scalar(out_nll_);
    t.ce_pref = graph_.scalar(out_ce_);
    t.entropy = graph_.scalar(out_ent_);
    t.loss = graph_.scalar(out_loss_);
    const auto& p = graph_.values(out_p_hat_);
    for (int c = 1; c < kNumPrefClasses; ++c)
        if (p[c] > p[t.pref_argmax]) t.pref_argmax = c;
    if (!std::isfinite(t.loss)) throw DataError("non-finite training loss");
    return t;
}

void PolicyNet::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write checkpoint: " + path);
    auto put_u32 = [&](uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); };
    f.write(kCheckpointMagic, 4);
    put_u32(kCheckpointVersion);
    put_u64(ModuleCatalog::instance().fingerprint());
    put_u32(static_cast<uint32_t>(params_.entries().size()));
    for (const auto& [name, t] : params_.entries()) {
        put_u32(static_cast<uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(static_cast<uint32_t>(t->rows));
        put_u32(static_cast<uint32_t>(t->cols));
        f.write(reinterpret_cast<const char*>(t->v.data()),
                static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!f) throw DataError("short write on checkpoint: " + path);
}

void PolicyNet::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read checkpoint: " + path);
    auto get_u32 = [&] {
        uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&] {
        uint64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw DataError("not a policy checkpoint: " + path);
    if (get_u32() != kCheckpointVersion) throw DataError("unsupported checkpoint version");
    if (get_u64() != ModuleCatalog::instance().fingerprint())
        throw DataError("checkpoint was written for a different strategy catalog");
    const uint32_t count = get_u32();
    if (count != params_.entries().size()) throw DataError("checkpoint entry count mismatch");
    for (const auto& [name, t] : params_.entries()) {
        const uint32_t len = get_u32();
        std::string got(len, '\0');
        f.read(got.data(), len);
        if (got != name) throw DataError("checkpoint entry order mismatch at " + name);
        if (get_u32() != static_cast<uint32_t>(t->rows) ||
            get_u32() != static_cast<uint32_t>(t->cols))
            throw DataError("checkpoint shape mismatch at " + name);
        f.read(reinterpret_cast<char*>(t->v.data()),
               static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!f) throw DataError("truncated checkpoint: " + path);
}

ConfigIndices sample_action(const PolicyOutput& out, Rng& rng, double* log_prob) {
    ConfigIndices idx{};
    double lp = 0.0;
    for (int m = 0; m < kNumModules; ++m) {
        const auto& d = out.dists[m];
        const double u = rng.uniform();
        double acc = 0.0;
        int pick = static_cast<int>(d.size()) - 1;
        for (size_t k = 0; k < d.size(); ++k) {
            acc += d[k];
            if (u < acc) {
                pick = static_cast<int>(k);
                break;
            }
        }
        idx[m] = pick;
        lp += std::log(d[pick]);
    }
    if (log_prob) *log_prob = lp;
    return idx;
}

ConfigIndices greedy_action(const PolicyOutput& out) {
    ConfigIndices idx{};
    for (int m = 0; m < kNumModules; ++m) {
        const auto& d = out.dists[m];
        int best = 0;
        for (size_t k = 1; k < d.size(); ++k)
            if (d[k] > d[best]) best = static_cast<int>(k);
        idx[m] = best;
    }
    return idx;
}

}  // namespace linkforge
