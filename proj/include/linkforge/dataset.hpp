#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkforge/policy.hpp"
#include "linkforge/search.hpp"
#include "linkforge/trainer.hpp"

namespace linkforge {

std::string base64_encode(const uint8_t* data, size_t n);
std::vector<uint8_t> base64_decode(const std::string& text);

// Row-major [16 x 65] float32, little-endian, base64.
std::string serialize_csi(const CsiFeatures& csi);
CsiFeatures parse_csi(const std::string& text);

// One tab-separated line per sample:
//   scenario  snr_db  class  channel_seed  eval_seed_base  intent text
//   action(8 comma-joined)  reward  csi_base64
// Doubles print with enough digits to round-trip bit-exactly; tokens are
// re-derived from the intent text on load.
std::string serialize_record(const Experience& e);
Experience parse_record(const std::string& line);

void write_dataset(const std::string& path, const std::vector<Experience>& buffer);
std::vector<Experience> load_dataset(const std::string& path);

// collect_expert + write_dataset under one seed.
void gen_dataset(const std::string& path, int n_samples, const SearchBudget& budget,
                 uint64_t seed);

// Paired means over budget.mc_seeds simulations; reward averages per-seed
// rewards, matching evaluate_config.
struct EvalStats {
    double ber = 0.0;
    double goodput = 0.0;
    double complexity = 0.0;
    double reward = 0.0;
};
EvalStats evaluate_stats(const LinkConfig& cfg, const ChannelRealization& ch,
                         const RewardWeights& w, const SearchBudget& budget);

struct EvalRecord {
    std::string scenario;
    double snr_db = 0.0;
    PrefClass cls = PrefClass::Conventional;
    std::string method;  // random | greedy | beam3 | policy
    double ber = 0.0;
    double goodput = 0.0;
    double complexity = 0.0;
    double reward = 0.0;
    double wall_time = 0.0;  // seconds; stays 0 unless timing is requested
};

// Full scenario x SNR grid x class sweep for every requested method. One
// channel realization per (scenario, snr) cell shared by all methods, search
// methods share eval seeds, and the chosen config is re-simulated with
// report_seeds fresh seeds. Cells run in parallel; row order is deterministic.
// net may be null when "policy" is not requested.
std::vector<EvalRecord> eval_sweep(PolicyNet* net, const std::vector<std::string>& methods,
                                   uint64_t seed, const SearchBudget& search_budget,
                                   int report_seeds = 100, bool measure_time = false);

std::string eval_csv(const std::vector<EvalRecord>& records);
void write_eval_csv(const std::string& path, const std::vector<EvalRecord>& records);

struct BenchRow {
    std::string method;
    double median_ms = 0.0;
    double evals_per_decision = 0.0;  // simulator calls; 0 for random/policy
};

// Median single-decision wall time over `reps` states shared by all methods.
std::vector<BenchRow> run_latency_bench(PolicyNet& net, int reps, const SearchBudget& budget,
                                        uint64_t seed);

}  // namespace linkforge
