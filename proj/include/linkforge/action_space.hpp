#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace linkforge {

enum class Coding { Uncoded, Rep3, Rep5, Hamming74, ConvR12 };
enum class ModScheme { BPSK, QPSK, QAM16, QAM64 };
enum class Estimation { Perfect, LSPilot };
enum class Equalization { ZF, MMSE };
enum class Harq { Off, Chase1, Chase2 };

constexpr int kNumModules = 8;

// One categorical choice per transmit-chain module.
struct LinkConfig {
    Coding coding = Coding::Uncoded;
    int spreading = 1;  // chip repetition factor, {1,2,4,8}
    ModScheme modulation = ModScheme::BPSK;
    double power = 0.25;  // fraction of max transmit power, {0.25,0.5,1.0}
    int allocation = 16;  // occupied subcarriers, {16,32,64}
    Estimation estimation = Estimation::Perfect;
    Equalization equalization = Equalization::ZF;
    Harq harq = Harq::Off;

    bool operator==(const LinkConfig&) const = default;
};

using ConfigIndices = std::array<int, kNumModules>;

// Immutable option catalog: module order, option labels, per-option
// complexity costs. Shared freely after construction.
class ModuleCatalog {
public:
    static const ModuleCatalog& instance();

    int option_count(int module) const { return counts_[module]; }
    const std::string& module_name(int module) const { return names_[module]; }
    const std::string& option_label(int module, int opt) const { return labels_[module][opt]; }
    int option_cost(int module, int opt) const { return costs_[module][opt]; }
    int total_configs() const;  // 17280

    // Human-readable dump, also the checkpoint compatibility fingerprint input.
    std::string manifest() const;
    uint64_t fingerprint() const;

private:
    ModuleCatalog();
    std::array<std::string, kNumModules> names_;
    std::array<int, kNumModules> counts_;
    std::array<std::array<std::string, 5>, kNumModules> labels_;
    std::array<std::array<int, 5>, kNumModules> costs_;
};

// index <-> config bijection; throws ConfigError on out-of-range indices.
LinkConfig index_to_config(const ConfigIndices& idx);
ConfigIndices config_to_index(const LinkConfig& cfg);

// Mixed-radix flattening over the full space, module 0 most significant.
int flatten_indices(const ConfigIndices& idx);
ConfigIndices unflatten_indices(int flat);

int complexity_cost(const LinkConfig& cfg);
int complexity_max();  // 19, by catalog scan

double code_rate(Coding c);
int bits_per_symbol(ModScheme m);
int pilot_subcarriers(const LinkConfig& cfg);  // 0 unless LSPilot

// Info bits per channel use before any simulation: code rate x bits/symbol
// x allocation fraction x 1/SF, derated by pilot overhead.
double nominal_rate(const LinkConfig& cfg);
double rate_max();  // exhaustive scan, cached

std::string config_to_string(const LinkConfig& cfg);

}  // namespace linkforge
