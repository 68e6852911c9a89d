#include "linkforge/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"
#include "linkforge/parallel.hpp"
#include "linkforge/phy.hpp"

namespace linkforge {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw DataError(std::string("bad ") + what + ": " + s);
    return v;
}

uint64_t parse_u64(const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const uint64_t v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw DataError(std::string("bad ") + what + ": " + s);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

std::string base64_encode(const uint8_t* data, size_t n) {
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= n; i += 3) {
        const uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8) |
                           uint32_t(data[i + 2]);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
    }
    if (i + 1 == n) {
        const uint32_t v = uint32_t(data[i]) << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == n) {
        const uint32_t v = (uint32_t(data[i]) << 16) | (uint32_t(data[i + 1]) << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    static const std::array<int8_t, 256> rev = [] {
        std::array<int8_t, 256> t;
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<uint8_t>(kB64Alphabet[i])] = int8_t(i);
        return t;
    }();
    if (text.size() % 4 != 0) throw DataError("base64 length not a multiple of 4");
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw DataError("misplaced base64 padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0 || rev[static_cast<uint8_t>(c)] < 0)
                throw DataError("invalid base64 character");
            v = (v << 6) | uint32_t(rev[static_cast<uint8_t>(c)]);
        }
        out.push_back(uint8_t(v >> 16));
        if (pad < 2) out.push_back(uint8_t(v >> 8));
        if (pad < 1) out.push_back(uint8_t(v));
    }
    return out;
}

std::string serialize_csi(const CsiFeatures& csi) {
    const size_t count = size_t(kGridTime) * kCsiCols;
    if (csi.m.size() != count) throw DataError("CSI feature block has the wrong size");
    std::vector<uint8_t> bytes(count * 4);
    for (size_t i = 0; i < count; ++i) {
        const uint32_t u = std::bit_cast<uint32_t>(csi.m[i]);
        bytes[4 * i + 0] = uint8_t(u);
        bytes[4 * i + 1] = uint8_t(u >> 8);
        bytes[4 * i + 2] = uint8_t(u >> 16);
        bytes[4 * i + 3] = uint8_t(u >> 24);
    }
    return base64_encode(bytes.data(), bytes.size());
}

CsiFeatures parse_csi(const std::string& text) {
    const std::vector<uint8_t> bytes = base64_decode(text);
    const size_t count = size_t(kGridTime) * kCsiCols;
    if (bytes.size() != count * 4) throw DataError("CSI payload has the wrong size");
    CsiFeatures csi;
    csi.m.resize(count);
    for (size_t i = 0; i < count; ++i) {
        const uint32_t u = uint32_t(bytes[4 * i]) | (uint32_t(bytes[4 * i + 1]) << 8) |
                           (uint32_t(bytes[4 * i + 2]) << 16) |
                           (uint32_t(bytes[4 * i + 3]) << 24);
        csi.m[i] = std::bit_cast<float>(u);
    }
    return csi;
}

std::string serialize_record(const Experience& e) {
    if (e.intent_text.find('\t') != std::string::npos ||
        e.intent_text.find('\n') != std::string::npos)
        throw DataError("intent text contains a separator character");
    std::string line = e.scenario;
    line += '\t';
    line += fmt_double(e.snr_db);
    line += '\t';
    line += pref_class_name(e.cls);
    line += '\t';
    line += std::to_string(e.channel_seed);
    line += '\t';
    line += std::to_string(e.eval_seed_base);
    line += '\t';
    line += e.intent_text;
    line += '\t';
    for (int m = 0; m < kNumModules; ++m) {
        if (m) line += ',';
        line += std::to_string(e.action[m]);
    }
    line += '\t';
    line += fmt_double(e.reward);
    line += '\t';
    line += serialize_csi(e.csi);
    return line;
}

Experience parse_record(const std::string& line) {
    const std::vector<std::string> f = split(line, '\t');
    if (f.size() != 9)
        throw DataError("expected 9 tab-separated fields, got " + std::to_string(f.size()));
    Experience e;
    e.scenario = f[0];
    bool scenario_found = false;
    for (const Scenario& sc : builtin_scenarios()) scenario_found |= sc.name == e.scenario;
    if (!scenario_found) throw DataError("unknown scenario: " + e.scenario);
    e.snr_db = parse_double(f[1], "snr_db");
    bool class_found = false;
    for (int c = 0; c < kNumPrefClasses; ++c) {
        if (f[2] == pref_class_name(static_cast<PrefClass>(c))) {
            e.cls = static_cast<PrefClass>(c);
            class_found = true;
            break;
        }
    }
    if (!class_found) throw DataError("unknown preference class: " + f[2]);
    e.channel_seed = parse_u64(f[3], "channel_seed");
    e.eval_seed_base = parse_u64(f[4], "eval_seed_base");
    e.intent_text = f[5];
    e.tokens = tokenize(e.intent_text);
    const std::vector<std::string> parts = split(f[6], ',');
    if (parts.size() != kNumModules)
        throw DataError("expected " + std::to_string(kNumModules) + " action indices");
    const auto& cat = ModuleCatalog::instance();
    for (int m = 0; m < kNumModules; ++m) {
        const long v = std::strtol(parts[m].c_str(), nullptr, 10);
        if (parts[m].empty() || v < 0 || v >= cat.option_count(m))
            throw DataError("action index out of range: " + parts[m]);
        e.action[m] = int(v);
    }
    e.reward = parse_double(f[7], "reward");
    e.csi = parse_csi(f[8]);
    return e;
}

void write_dataset(const std::string& path, const std::vector<Experience>& buffer) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write dataset: " + path);
    for (const Experience& e : buffer) f << serialize_record(e) << '\n';
    f.flush();
    if (!f) throw DataError("write failed: " + path);
}

std::vector<Experience> load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot read dataset: " + path);
    std::vector<Experience> buffer;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        try {
            buffer.push_back(parse_record(line));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return buffer;
}

void gen_dataset(const std::string& path, int n_samples, const SearchBudget& budget,
                 uint64_t seed) {
    write_dataset(path, collect_expert(n_samples, budget, seed));
}

EvalStats evaluate_stats(const LinkConfig& cfg, const ChannelRealization& ch,
                         const RewardWeights& w, const SearchBudget& budget) {
    if (budget.mc_seeds < 1) throw ConfigError("mc_seeds must be at least 1");
    EvalStats st;
    for (int i = 0; i < budget.mc_seeds; ++i) {
        Payload payload =
            random_payload(budget.payload_bits, mix_seed(budget.eval_seed_base, i, 1));
        SimResult sim = simulate_link(cfg, ch, payload, mix_seed(budget.eval_seed_base, i, 2));
        st.ber += sim.metrics.ber;
        st.goodput += sim.metrics.goodput;
        st.complexity = sim.metrics.complexity;
        st.reward += reward(normalize_metrics(sim), w);
    }
    st.ber /= budget.mc_seeds;
    st.goodput /= budget.mc_seeds;
    st.reward /= budget.mc_seeds;
    return st;
}

std::vector<EvalRecord> eval_sweep(PolicyNet* net, const std::vector<std::string>& methods,
                                   uint64_t seed, const SearchBudget& search_budget,
                                   int report_seeds, bool measure_time) {
    static const std::array<const char*, 4> kKnown = {"random", "greedy", "beam3", "policy"};
    if (methods.empty()) throw ConfigError("eval needs at least one method");
    bool wants_policy = false;
    for (const std::string& m : methods) {
        if (std::find(kKnown.begin(), kKnown.end(), m) == kKnown.end())
            throw ConfigError("unknown method: " + m);
        wants_policy = wants_policy || m == "policy";
    }
    if (wants_policy && net == nullptr)
        throw ConfigError("policy evaluation needs a loaded checkpoint");

    const auto& scenarios = builtin_scenarios();
    const auto grid = default_snr_grid();
    const int S = int(scenarios.size());
    const int V = int(grid.size());
    const int C = kNumPrefClasses;
    const int M = int(methods.size());

    // The network graph is stateful, so policy decisions run serially up
    // front; everything else parallelizes over grid cells.
    std::vector<LinkConfig> policy_choice;
    std::vector<double> policy_ms;
    if (wants_policy) {
        policy_choice.resize(size_t(S) * V * C);
        policy_ms.assign(size_t(S) * V * C, 0.0);
        for (int si = 0; si < S; ++si) {
            for (int vi = 0; vi < V; ++vi) {
                const ChannelRealization ch =
                    generate_channel(scenarios[si], grid[vi], mix_seed(seed, si, vi, 100));
                const CsiFeatures csi = csi_features(ch);
                for (int ci = 0; ci < C; ++ci) {
                    const auto tokens =
                        generate_intent(static_cast<PrefClass>(ci), scenarios[si],
                                        mix_seed(seed, si, vi, 200 + ci))
                            .tokens;
                    const auto t0 = std::chrono::steady_clock::now();
                    const ConfigIndices a = greedy_action(net->forward(csi, tokens));
                    const size_t cell = (size_t(si) * V + vi) * C + ci;
                    policy_ms[cell] = elapsed_ms(t0);
                    policy_choice[cell] = index_to_config(a);
                }
            }
        }
    }

    const int n = S * V * C * M;
    std::vector<EvalRecord> out(static_cast<size_t>(n));
    parallel_for(n, [&](int i) {
        const int mi = i % M;
        const int ci = (i / M) % C;
        const int vi = (i / (M * C)) % V;
        const int si = i / (M * C * V);
        const Scenario& sc = scenarios[si];
        const PrefClass cls = static_cast<PrefClass>(ci);
        const RewardWeights w = class_weights(cls);
        const ChannelRealization ch =
            generate_channel(sc, grid[vi], mix_seed(seed, si, vi, 100));

        SearchBudget sb = search_budget;
        sb.eval_seed_base = mix_seed(seed, si, vi, 300);

        LinkConfig cfg;
        double wall_ms = 0.0;
        const std::string& method = methods[size_t(mi)];
        const auto t0 = std::chrono::steady_clock::now();
        if (method == "random") {
            cfg = random_select(mix_seed(seed, si, vi, 400 + ci));
        } else if (method == "greedy") {
            cfg = greedy_search(ch, w, sb).config;
        } else if (method == "beam3") {
            cfg = beam_search(ch, w, 3, sb).config;
        } else {
            const size_t cell = (size_t(si) * V + vi) * C + ci;
            cfg = policy_choice[cell];
            wall_ms = policy_ms[cell];
        }
        if (method != "policy") wall_ms = elapsed_ms(t0);

        SearchBudget rb;
        rb.mc_seeds = report_seeds;
        rb.payload_bits = search_budget.payload_bits;
        rb.eval_seed_base = mix_seed(seed, si, vi, 500);
        const EvalStats st = evaluate_stats(cfg, ch, w, rb);

        EvalRecord& r = out[size_t(i)];
        r.scenario = sc.name;
        r.snr_db = grid[vi];
        r.cls = cls;
        r.method = method;
        r.ber = st.ber;
        r.goodput = st.goodput;
        r.complexity = st.complexity;
        r.reward = st.reward;
        r.wall_time = measure_time ? wall_ms / 1000.0 : 0.0;
    });
    return out;
}

std::string eval_csv(const std::vector<EvalRecord>& records) {
    std::string out = "scenario,snr_db,class,method,ber,goodput,complexity,reward,wall_time\n";
    char buf[256];
    for (const EvalRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%.10g,%s,%s,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      r.scenario.c_str(), r.snr_db, pref_class_name(r.cls).c_str(),
                      r.method.c_str(), r.ber, r.goodput, r.complexity, r.reward, r.wall_time);
        out += buf;
    }
    return out;
}

void write_eval_csv(const std::string& path, const std::vector<EvalRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write eval table: " + path);
    f << eval_csv(records);
    f.flush();
    if (!f) throw DataError("write failed: " + path);
}

std::vector<BenchRow> run_latency_bench(PolicyNet& net, int reps, const SearchBudget& budget,
                                        uint64_t seed) {
    if (reps < 1) throw ConfigError("bench needs at least one repetition");
    const auto& scenarios = builtin_scenarios();
    const auto grid = default_snr_grid();
    const auto& cat = ModuleCatalog::instance();

    struct State {
        ChannelRealization ch;
        CsiFeatures csi;
        std::vector<int> tokens;
        RewardWeights w;
        SearchBudget b;
        uint64_t rand_seed;
    };
    std::vector<State> states;
    states.reserve(size_t(reps));
    for (int i = 0; i < reps; ++i) {
        State s;
        const Scenario& sc = scenarios[size_t(i) % scenarios.size()];
        const double snr = grid[size_t(i) % grid.size()];
        const PrefClass cls = static_cast<PrefClass>(i % kNumPrefClasses);
        s.ch = generate_channel(sc, snr, mix_seed(seed, i, 600));
        s.csi = csi_features(s.ch);
        s.tokens = generate_intent(cls, sc, mix_seed(seed, i, 601)).tokens;
        s.w = class_weights(cls);
        s.b = budget;
        s.b.eval_seed_base = mix_seed(seed, i, 602);
        s.rand_seed = mix_seed(seed, i, 603);
        states.push_back(std::move(s));
    }

    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };

    double greedy_evals = 0.0;
    for (int m = 0; m < kNumModules; ++m) greedy_evals += cat.option_count(m);
    double beam_evals = 0.0;
    {
        long long width = 1;
        for (int m = 0; m < kNumModules; ++m) {
            beam_evals += double(width) * cat.option_count(m);
            width = std::min<long long>(3, width * cat.option_count(m));
        }
    }

    long long sink = 0;  // keeps decisions observable
    std::vector<BenchRow> rows;
    {
        std::vector<double> t(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            sink += flatten_indices(config_to_index(random_select(states[i].rand_seed)));
            t[i] = elapsed_ms(t0);
        }
        rows.push_back({"random", median(t), 0.0});
    }
    {
        std::vector<double> t(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            sink += flatten_indices(greedy_action(net.forward(states[i].csi, states[i].tokens)));
            t[i] = elapsed_ms(t0);
        }
        rows.push_back({"policy", median(t), 0.0});
    }
    {
        std::vector<double> t(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            sink += flatten_indices(
                config_to_index(greedy_search(states[i].ch, states[i].w, states[i].b).config));
            t[i] = elapsed_ms(t0);
        }
        rows.push_back({"greedy", median(t), greedy_evals});
    }
    {
        std::vector<double> t(states.size());
        for (size_t i = 0; i < states.size(); ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            sink += flatten_indices(
                config_to_index(beam_search(states[i].ch, states[i].w, 3, states[i].b).config));
            t[i] = elapsed_ms(t0);
        }
        rows.push_back({"beam3", median(t), beam_evals});
    }
    if (sink == -1) rows.clear();  // never taken; defeats dead-code elimination
    return rows;
}

}  // namespace linkforge
