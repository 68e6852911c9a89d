#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "linkforge/dataset.hpp"
#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"
#include "linkforge/phy.hpp"

namespace lf = linkforge;
using nlohmann::json;

namespace {

struct GenDataArgs {
    int samples = 5000;
    std::string out;
    uint64_t seed = 1;
    int mc_seeds = 20;
    int payload_bits = 1024;
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::string config;
    std::string metrics;
    std::optional<uint64_t> seed;
};

struct EvalArgs {
    std::string ckpt;
    std::string methods = "random,greedy,beam3,policy";
    std::string out;
    uint64_t seed = 1;
    int mc_seeds = 20;
    int payload_bits = 1024;
    int report_seeds = 100;
    bool measure_time = false;
};

struct BenchArgs {
    std::string ckpt;
    int reps = 50;
    uint64_t seed = 1;
    int mc_seeds = 20;
    int payload_bits = 1024;
};

struct InteractArgs {
    std::string ckpt;
    uint64_t seed = 1;
    int payload_bits = 1024;
};

struct CorpusArgs {
    int samples = 30;
    uint64_t seed = 1;
    std::string out;
};

template <typename T>
void read_key(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

lf::TrainConfig load_train_config(const std::string& path) {
    lf::TrainConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw lf::DataError("cannot read train config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw lf::ConfigError("train config " + path + ": " + e.what());
    }
    static const std::vector<std::string> known = {
        "expert_samples", "bc_epochs",   "rl_steps",       "batch_size",
        "lr",             "rl_lr",       "lambda_start",   "lambda_end",
        "entropy_coef",   "baseline_decay", "seed",        "mc_seeds",
        "payload_bits",   "rl_mc_seeds", "checkpoint_every"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const auto& k : known) ok = ok || k == key;
        if (!ok) throw lf::ConfigError("unknown train config key: " + key);
    }
    try {
        read_key(j, "expert_samples", cfg.expert_samples);
        read_key(j, "bc_epochs", cfg.bc_epochs);
        read_key(j, "rl_steps", cfg.rl_steps);
        read_key(j, "batch_size", cfg.batch_size);
        read_key(j, "lr", cfg.lr);
        read_key(j, "rl_lr", cfg.rl_lr);
        read_key(j, "lambda_start", cfg.lambda_start);
        read_key(j, "lambda_end", cfg.lambda_end);
        read_key(j, "entropy_coef", cfg.entropy_coef);
        read_key(j, "baseline_decay", cfg.baseline_decay);
        read_key(j, "seed", cfg.seed);
        read_key(j, "mc_seeds", cfg.budget.mc_seeds);
        read_key(j, "payload_bits", cfg.budget.payload_bits);
        read_key(j, "rl_mc_seeds", cfg.rl_mc_seeds);
        read_key(j, "checkpoint_every", cfg.checkpoint_every);
    } catch (const json::exception& e) {
        throw lf::ConfigError("train config " + path + ": " + e.what());
    }
    return cfg;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int run_gen_data(const GenDataArgs& a) {
    lf::SearchBudget budget;
    budget.mc_seeds = a.mc_seeds;
    budget.payload_bits = a.payload_bits;
    lf::gen_dataset(a.out, a.samples, budget, a.seed);
    std::printf("wrote %d expert records to %s\n", a.samples, a.out.c_str());
    return 0;
}

int run_train(const TrainArgs& a) {
    lf::TrainConfig cfg = load_train_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    cfg.checkpoint_path = a.out;

    lf::PolicyNet net(cfg.seed);
    lf::Trainer trainer(net, cfg);
    if (!a.data.empty()) trainer.set_buffer(lf::load_dataset(a.data));
    trainer.train();

    const std::string metrics_path = a.metrics.empty() ? a.out + ".metrics.csv" : a.metrics;
    std::ofstream mf(metrics_path, std::ios::binary);
    if (!mf) throw lf::DataError("cannot write metrics log: " + metrics_path);
    mf << trainer.metrics();
    mf.flush();
    if (!mf) throw lf::DataError("write failed: " + metrics_path);
    std::printf("checkpoint: %s\nmetrics: %s\n", a.out.c_str(), metrics_path.c_str());
    return 0;
}

int run_eval(const EvalArgs& a) {
    const std::vector<std::string> methods = split_csv(a.methods);
    bool wants_policy = false;
    for (const auto& m : methods) wants_policy = wants_policy || m == "policy";

    lf::PolicyNet net;
    if (wants_policy) {
        if (a.ckpt.empty()) throw lf::ConfigError("--ckpt is required when evaluating policy");
        net.load(a.ckpt);
    }
    lf::SearchBudget budget;
    budget.mc_seeds = a.mc_seeds;
    budget.payload_bits = a.payload_bits;
    const auto records = lf::eval_sweep(wants_policy ? &net : nullptr, methods, a.seed, budget,
                                        a.report_seeds, a.measure_time);
    lf::write_eval_csv(a.out, records);
    std::printf("wrote %zu eval rows to %s\n", records.size(), a.out.c_str());
    return 0;
}

int run_bench(const BenchArgs& a) {
    lf::PolicyNet net;
    net.load(a.ckpt);
    lf::SearchBudget budget;
    budget.mc_seeds = a.mc_seeds;
    budget.payload_bits = a.payload_bits;
    const auto rows = lf::run_latency_bench(net, a.reps, budget, a.seed);
    std::printf("%-8s  %12s  %14s\n", "method", "median_ms", "sims_per_call");
    for (const auto& r : rows)
        std::printf("%-8s  %12.4f  %14.0f\n", r.method.c_str(), r.median_ms,
                    r.evals_per_decision * budget.mc_seeds);
    return 0;
}

void print_strategy(const lf::ConfigIndices& idx) {
    const auto& cat = lf::ModuleCatalog::instance();
    for (int m = 0; m < lf::kNumModules; ++m)
        std::printf("  %-11s %s\n", (cat.module_name(m) + ":").c_str(),
                    cat.option_label(m, idx[m]).c_str());
}

void print_rationale(const lf::PreferenceVector& p, const lf::LinkConfig& cfg) {
    const auto& cat = lf::ModuleCatalog::instance();
    const lf::ConfigIndices idx = lf::config_to_index(cfg);
    if (p.rel >= p.thr && p.rel >= p.cmp) {
        std::printf(
            "rationale: reliability dominates the request, so the chain leans on %s coding "
            "with spreading factor %d and accepts the rate cost.\n",
            cat.option_label(0, idx[0]).c_str(), cfg.spreading);
    } else if (p.thr >= p.rel && p.thr >= p.cmp) {
        std::printf(
            "rationale: throughput dominates the request, so the chain sends %s on %d "
            "subcarriers with only as much protection as the channel demands.\n",
            cat.option_label(2, idx[2]).c_str(), cfg.allocation);
    } else {
        std::printf(
            "rationale: low complexity dominates the request, so the chain keeps cheap "
            "modules, spending %d of %d complexity units.\n",
            lf::complexity_cost(cfg), lf::complexity_max());
    }
}

int run_interact(const InteractArgs& a) {
    lf::PolicyNet net;
    net.load(a.ckpt);
    std::printf("enter: <scenario> <snr_db> <intent text>   (scenarios:");
    for (const auto& sc : lf::builtin_scenarios()) std::printf(" %s", sc.name.c_str());
    std::printf("; quit to exit)\n");

    std::string line;
    for (;;) {
        std::printf("linkforge> ");
        std::fflush(stdout);
        if (!std::getline(std::cin, line)) break;
        std::istringstream ss(line);
        std::string scenario_name;
        double snr_db = 0.0;
        ss >> scenario_name;
        if (scenario_name.empty()) continue;
        if (scenario_name == "quit") break;
        if (!(ss >> snr_db)) {
            std::printf("could not parse an SNR value; try: urban 10 keep errors low\n");
            continue;
        }
        std::string intent;
        std::getline(ss, intent);
        if (!intent.empty() && intent.front() == ' ') intent.erase(0, 1);

        lf::Scenario sc;
        try {
            sc = lf::scenario_by_name(scenario_name);
        } catch (const lf::ConfigError&) {
            std::printf("unknown scenario \"%s\"; choose one of:", scenario_name.c_str());
            for (const auto& s : lf::builtin_scenarios()) std::printf(" %s", s.name.c_str());
            std::printf("\n");
            continue;
        }

        const uint64_t ch_seed = lf::mix_seed(
            a.seed, lf::fnv1a(scenario_name.data(), scenario_name.size()),
            static_cast<uint64_t>(std::llround(snr_db * 1000.0)));
        const lf::ChannelRealization ch = lf::generate_channel(sc, snr_db, ch_seed);
        const lf::PolicyOutput out = net.forward(lf::csi_features(ch), lf::tokenize(intent));

        int cls = 0;
        const double pv[3] = {out.p_hat.rel, out.p_hat.thr, out.p_hat.cmp};
        for (int c = 1; c < lf::kNumPrefClasses; ++c)
            if (pv[c] > pv[cls]) cls = c;
        std::printf("inferred preference: %s  (reliability %.3f, throughput %.3f, "
                    "complexity %.3f)\n",
                    lf::pref_class_name(static_cast<lf::PrefClass>(cls)).c_str(), out.p_hat.rel,
                    out.p_hat.thr, out.p_hat.cmp);

        const lf::ConfigIndices idx = lf::greedy_action(out);
        const lf::LinkConfig cfg = lf::index_to_config(idx);
        std::printf("strategy:\n");
        print_strategy(idx);

        lf::SearchBudget qb;
        qb.mc_seeds = 20;
        qb.payload_bits = a.payload_bits;
        qb.eval_seed_base = lf::mix_seed(ch_seed, 7);
        const lf::EvalStats st =
            lf::evaluate_stats(cfg, ch, lf::pref_to_weights(out.p_hat), qb);
        std::printf("predicted (20-seed sim): ber %.3g, goodput %.4f bit/use, complexity "
                    "%d/%d, reward %.3f\n",
                    st.ber, st.goodput, lf::complexity_cost(cfg), lf::complexity_max(),
                    st.reward);
        print_rationale(out.p_hat, cfg);
    }
    return 0;
}

int run_catalog() {
    const auto& cat = lf::ModuleCatalog::instance();
    std::printf("%s", cat.manifest().c_str());
    std::printf("total configs: %d\ncomplexity max: %d\nnominal rate max: %.6f\n"
                "fingerprint: %016llx\n",
                cat.total_configs(), lf::complexity_max(), lf::rate_max(),
                static_cast<unsigned long long>(cat.fingerprint()));
    return 0;
}

int run_corpus(const CorpusArgs& a) {
    const std::string text = lf::corpus_text(a.samples, a.seed);
    if (a.out.empty()) {
        std::printf("%s", text.c_str());
        return 0;
    }
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw lf::DataError("cannot write corpus: " + a.out);
    f << text;
    f.flush();
    if (!f) throw lf::DataError("write failed: " + a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"link strategy simulator, searcher, and preference-conditioned policy"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 2 config error, 3 data error.\n"
               "LINKFORGE_THREADS caps worker threads (default: hardware concurrency).");

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate an expert-labeled training dataset");
    gen->add_option("--samples", gd.samples, "stratified sample count")->capture_default_str();
    gen->add_option("--out", gd.out, "output dataset path")->required();
    gen->add_option("--seed", gd.seed, "master seed")->capture_default_str();
    gen->add_option("--mc-seeds", gd.mc_seeds, "simulations per candidate during labeling")
        ->capture_default_str();
    gen->add_option("--payload-bits", gd.payload_bits, "payload length per simulation")
        ->capture_default_str();

    TrainArgs tr;
    uint64_t tr_seed = 0;
    auto* train = app.add_subcommand("train", "two-stage policy training");
    train->add_option("--data", tr.data, "expert dataset from gen-data (omit to collect)");
    train->add_option("--out", tr.out, "checkpoint output path")->required();
    train->add_option("--config", tr.config, "JSON training config");
    train->add_option("--metrics", tr.metrics, "metrics log path (default: <out>.metrics.csv)");
    auto* tr_seed_opt =
        train->add_option("--seed", tr_seed, "master seed; overrides the config value (default 1)");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "sweep scenarios x SNR x classes x methods");
    eval->add_option("--ckpt", ev.ckpt, "policy checkpoint");
    eval->add_option("--methods", ev.methods, "comma list from random,greedy,beam3,policy")
        ->capture_default_str();
    eval->add_option("--out", ev.out, "output CSV path")->required();
    eval->add_option("--seed", ev.seed, "master seed")->capture_default_str();
    eval->add_option("--mc-seeds", ev.mc_seeds, "simulations per candidate during search")
        ->capture_default_str();
    eval->add_option("--payload-bits", ev.payload_bits, "payload length per simulation")
        ->capture_default_str();
    eval->add_option("--report-seeds", ev.report_seeds, "simulations behind each reported row")
        ->capture_default_str();
    eval->add_flag("--measure-time", ev.measure_time,
                   "fill wall_time with measured decision seconds (off keeps output "
                   "reproducible)");

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "single-decision latency comparison");
    bench->add_option("--ckpt", bn.ckpt, "policy checkpoint")->required();
    bench->add_option("--reps", bn.reps, "repetitions per method")->capture_default_str();
    bench->add_option("--seed", bn.seed, "master seed")->capture_default_str();
    bench->add_option("--mc-seeds", bn.mc_seeds, "simulations per candidate during search")
        ->capture_default_str();
    bench->add_option("--payload-bits", bn.payload_bits, "payload length per simulation")
        ->capture_default_str();

    InteractArgs it;
    auto* interact = app.add_subcommand("interact", "strategy-query loop over free-text intents");
    interact->add_option("--ckpt", it.ckpt, "policy checkpoint")->required();
    interact->add_option("--seed", it.seed, "master seed (fixes the channel draw per query)")
        ->capture_default_str();
    interact->add_option("--payload-bits", it.payload_bits, "payload length per simulation")
        ->capture_default_str();

    auto* catalog = app.add_subcommand("catalog", "print the module catalog and fingerprint");

    CorpusArgs co;
    auto* corpus = app.add_subcommand("corpus", "print a templated intent corpus");
    corpus->add_option("--samples", co.samples, "line count")->capture_default_str();
    corpus->add_option("--seed", co.seed, "master seed")->capture_default_str();
    corpus->add_option("--out", co.out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return run_gen_data(gd);
        if (train->parsed()) {
            if (tr_seed_opt->count() > 0) tr.seed = tr_seed;
            return run_train(tr);
        }
        if (eval->parsed()) return run_eval(ev);
        if (bench->parsed()) return run_bench(bn);
        if (interact->parsed()) return run_interact(it);
        if (catalog->parsed()) return run_catalog();
        if (corpus->parsed()) return run_corpus(co);
    } catch (const lf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const lf::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
