#include "linkforge/action_space.hpp"

#include <cmath>
#include <sstream>

#include "linkforge/errors.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

namespace {
const int kSpreadOptions[4] = {1, 2, 4, 8};
const double kPowerOptions[3] = {0.25, 0.5, 1.0};
const int kAllocOptions[3] = {16, 32, 64};
}  // namespace

ModuleCatalog::ModuleCatalog() {
    names_ = {"coding", "spreading", "modulation", "power",
              "allocation", "estimation", "equalization", "harq"};
    counts_ = {5, 4, 4, 3, 3, 2, 2, 3};
    labels_[0] = {"uncoded", "rep3", "rep5", "hamming74", "conv_r12"};
    costs_[0] = {0, 1, 2, 2, 5};
    labels_[1] = {"sf1", "sf2", "sf4", "sf8", ""};
    costs_[1] = {0, 1, 2, 3, 0};  // log2(SF)
    labels_[2] = {"bpsk", "qpsk", "qam16", "qam64", ""};
    costs_[2] = {1, 1, 2, 3, 0};
    labels_[3] = {"p25", "p50", "p100", "", ""};
    costs_[3] = {0, 0, 0, 0, 0};
    labels_[4] = {"sc16", "sc32", "sc64", "", ""};
    costs_[4] = {0, 0, 0, 0, 0};
    labels_[5] = {"perfect", "ls_pilot", "", "", ""};
    costs_[5] = {0, 2, 0, 0, 0};
    labels_[6] = {"zf", "mmse", "", "", ""};
    costs_[6] = {1, 3, 0, 0, 0};
    labels_[7] = {"off", "chase1", "chase2", "", ""};
    costs_[7] = {0, 2, 3, 0, 0};
}

const ModuleCatalog& ModuleCatalog::instance() {
    static const ModuleCatalog cat;
    return cat;
}

int ModuleCatalog::total_configs() const {
    int n = 1;
    for (int m = 0; m < kNumModules; ++m) n *= counts_[m];
    return n;
}

std::string ModuleCatalog::manifest() const {
    std::ostringstream out;
    out << "linkforge strategy catalog v1\n";
    for (int m = 0; m < kNumModules; ++m) {
        out << names_[m] << ":";
        for (int o = 0; o < counts_[m]; ++o)
            out << " " << labels_[m][o] << "(cost=" << costs_[m][o] << ")";
        out << "\n";
    }
    return out.str();
}

uint64_t ModuleCatalog::fingerprint() const {
    const std::string m = manifest();
    return fnv1a(m.data(), m.size());
}

LinkConfig index_to_config(const ConfigIndices& idx) {
    const auto& cat = ModuleCatalog::instance();
    for (int m = 0; m < kNumModules; ++m) {
        if (idx[m] < 0 || idx[m] >= cat.option_count(m))
            throw ConfigError("option index " + std::to_string(idx[m]) +
                              " out of range for module " + cat.module_name(m));
    }
    LinkConfig cfg;
    cfg.coding = static_cast<Coding>(idx[0]);
    cfg.spreading = kSpreadOptions[idx[1]];
    cfg.modulation = static_cast<ModScheme>(idx[2]);
    cfg.power = kPowerOptions[idx[3]];
    cfg.allocation = kAllocOptions[idx[4]];
    cfg.estimation = static_cast<Estimation>(idx[5]);
    cfg.equalization = static_cast<Equalization>(idx[6]);
    cfg.harq = static_cast<Harq>(idx[7]);
    return cfg;
}

ConfigIndices config_to_index(const LinkConfig& cfg) {
    ConfigIndices idx{};
    idx[0] = static_cast<int>(cfg.coding);
    switch (cfg.spreading) {
        case 1: idx[1] = 0; break;
        case 2: idx[1] = 1; break;
        case 4: idx[1] = 2; break;
        case 8: idx[1] = 3; break;
        default: throw ConfigError("spreading factor not in catalog");
    }
    idx[2] = static_cast<int>(cfg.modulation);
    if (cfg.power == 0.25) idx[3] = 0;
    else if (cfg.power == 0.5) idx[3] = 1;
    else if (cfg.power == 1.0) idx[3] = 2;
    else throw ConfigError("power fraction not in catalog");
    switch (cfg.allocation) {
        case 16: idx[4] = 0; break;
        case 32: idx[4] = 1; break;
        case 64: idx[4] = 2; break;
        default: throw ConfigError("allocation not in catalog");
    }
    idx[5] = static_cast<int>(cfg.estimation);
    idx[6] = static_cast<int>(cfg.equalization);
    idx[7] = static_cast<int>(cfg.harq);
    return idx;
}

int flatten_indices(const ConfigIndices& idx) {
    const auto& cat = ModuleCatalog::instance();
    int flat = 0;
    for (int m = 0; m < kNumModules; ++m) flat = flat * cat.option_count(m) + idx[m];
    return flat;
}

ConfigIndices unflatten_indices(int flat) {
    const auto& cat = ModuleCatalog::instance();
    if (flat < 0 || flat >= cat.total_configs())
        throw ConfigError("flat config index out of range");
    ConfigIndices idx{};
    for (int m = kNumModules - 1; m >= 0; --m) {
        const int n = cat.option_count(m);
        idx[m] = flat % n;
        flat /= n;
    }
    return idx;
}

int complexity_cost(const LinkConfig& cfg) {
    const auto& cat = ModuleCatalog::instance();
    const ConfigIndices idx = config_to_index(cfg);
    int c = 0;
    for (int m = 0; m < kNumModules; ++m) c += cat.option_cost(m, idx[m]);
    return c;
}

int complexity_max() {
    static const int mx = [] {
        const auto& cat = ModuleCatalog::instance();
        int c = 0;
        for (int m = 0; m < kNumModules; ++m) {
            int best = 0;
            for (int o = 0; o < cat.option_count(m); ++o)
                best = std::max(best, cat.option_cost(m, o));
            c += best;
        }
        return c;
    }();
    return mx;
}

double code_rate(Coding c) {
    switch (c) {
        case Coding::Uncoded: return 1.0;
        case Coding::Rep3: return 1.0 / 3.0;
        case Coding::Rep5: return 1.0 / 5.0;
        case Coding::Hamming74: return 4.0 / 7.0;
        case Coding::ConvR12: return 0.5;
    }
    throw ConfigError("unknown coding choice");
}

int bits_per_symbol(ModScheme m) {
    switch (m) {
        case ModScheme::BPSK: return 1;
        case ModScheme::QPSK: return 2;
        case ModScheme::QAM16: return 4;
        case ModScheme::QAM64: return 6;
    }
    throw ConfigError("unknown modulation scheme");
}

int pilot_subcarriers(const LinkConfig& cfg) {
    if (cfg.estimation != Estimation::LSPilot) return 0;
    return (cfg.allocation + 7) / 8;  // comb spacing 8
}

double nominal_rate(const LinkConfig& cfg) {
    const double pilots = pilot_subcarriers(cfg);
    const double pilot_factor = (cfg.allocation - pilots) / double(cfg.allocation);
    return code_rate(cfg.coding) * bits_per_symbol(cfg.modulation) *
           (cfg.allocation / 64.0) * (1.0 / cfg.spreading) * pilot_factor;
}

double rate_max() {
    static const double mx = [] {
        const auto& cat = ModuleCatalog::instance();
        double best = 0.0;
        for (int flat = 0; flat < cat.total_configs(); ++flat)
            best = std::max(best, nominal_rate(index_to_config(unflatten_indices(flat))));
        return best;
    }();
    return mx;
}

std::string config_to_string(const LinkConfig& cfg) {
    const auto& cat = ModuleCatalog::instance();
    const ConfigIndices idx = config_to_index(cfg);
    std::string s;
    for (int m = 0; m < kNumModules; ++m) {
        if (m) s += " ";
        s += cat.module_name(m) + "=" + cat.option_label(m, idx[m]);
    }
    return s;
}

}  // namespace linkforge
