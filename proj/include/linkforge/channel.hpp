#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace linkforge {

// Fixed time-frequency grid: 16 OFDM symbols x 64 subcarriers.
constexpr int kGridTime = 16;
constexpr int kGridFreq = 64;
constexpr int kCsiCols = kGridFreq + 1;  // SNR appended as an extra column

// Tapped-delay-line fading profile. delay_spread is the per-tap delay
// increment in DFT samples; doppler is the normalized Doppler f_d*T.
struct Scenario {
    std::string name;
    int num_taps = 1;
    double delay_spread = 0.0;
    double doppler = 0.0;
};

Scenario scenario_by_name(const std::string& name);  // urban / rural / highway
const std::vector<Scenario>& builtin_scenarios();

// Plain-text profile file: [name] sections with taps/delay_spread/doppler keys.
std::vector<Scenario> load_scenario_profiles(const std::string& path);
Scenario scenario_from_list(const std::vector<Scenario>& list, const std::string& name);

struct ChannelRealization {
    std::vector<std::complex<double>> gains;  // row-major [kGridTime x kGridFreq]
    double noise_variance = 1.0;              // total complex noise power per cell
    Scenario scenario;
    double snr_db = 0.0;

    std::complex<double> gain(int t, int f) const { return gains[t * kGridFreq + f]; }
};

// Rayleigh taps with Jakes sum-of-sinusoids time evolution, combined across
// frequency by the tap delays. Unit average channel power by construction.
// Deterministic in (scenario, snr_db, seed).
ChannelRealization generate_channel(const Scenario& sc, double snr_db, uint64_t seed);

// Per-cell gain magnitudes in dB, clipped to [-40, +20], plus the SNR column.
// Entries are canonicalized through float32 so in-memory values match the
// serialized dataset bit for bit.
struct CsiFeatures {
    std::vector<float> m;  // row-major [kGridTime x kCsiCols]

    float at(int t, int c) const { return m[t * kCsiCols + c]; }
};

CsiFeatures csi_features(const ChannelRealization& ch);

}  // namespace linkforge
