#include "linkforge/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "linkforge/errors.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

namespace {
constexpr int kSinusoids = 16;  // per tap
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}
}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> profiles = {
        {"urban", 6, 2.0, 0.01},
        {"rural", 3, 1.0, 0.005},
        {"highway", 4, 3.0, 0.05},
    };
    return profiles;
}

Scenario scenario_from_list(const std::vector<Scenario>& list, const std::string& name) {
    const std::string key = lower(name);
    for (const auto& sc : list)
        if (lower(sc.name) == key) return sc;
    throw ConfigError("unknown scenario '" + name + "'");
}

Scenario scenario_by_name(const std::string& name) {
    return scenario_from_list(builtin_scenarios(), name);
}

std::vector<Scenario> load_scenario_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scenario profile file: " + path);
    std::vector<Scenario> out;
    Scenario cur;
    bool open = false;
    std::string line;
    int lineno = 0;
    auto flush = [&] {
        if (!open) return;
        if (cur.num_taps < 1 || cur.delay_spread < 0 || cur.doppler < 0)
            throw DataError(path + ": invalid profile for scenario '" + cur.name + "'");
        out.push_back(cur);
        open = false;
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[' && line.back() == ']') {
            flush();
            cur = Scenario{};
            cur.name = line.substr(1, line.size() - 2);
            if (cur.name.empty())
                throw DataError(path + ":" + std::to_string(lineno) + ": empty scenario name");
            open = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || !open)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected key = value inside a [scenario] section");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b2 = s.find_first_not_of(" \t");
            const auto e2 = s.find_last_not_of(" \t");
            s = (b2 == std::string::npos) ? "" : s.substr(b2, e2 - b2 + 1);
        };
        trim(key);
        trim(val);
        try {
            if (key == "taps") cur.num_taps = std::stoi(val);
            else if (key == "delay_spread") cur.delay_spread = std::stod(val);
            else if (key == "doppler") cur.doppler = std::stod(val);
            else throw DataError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
        }
    }
    flush();
    if (out.empty()) throw DataError(path + ": no scenario profiles found");
    return out;
}

ChannelRealization generate_channel(const Scenario& sc, double snr_db, uint64_t seed) {
    if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
    if (sc.num_taps < 1) throw ConfigError("scenario needs at least one tap");

    // Gains depend on (scenario, seed) only; SNR sets the noise floor.
    uint64_t h = fnv1a(sc.name.data(), sc.name.size());
    h = mix_seed(h, static_cast<uint64_t>(sc.num_taps));
    uint64_t bits_ds, bits_fd;
    std::memcpy(&bits_ds, &sc.delay_spread, 8);
    std::memcpy(&bits_fd, &sc.doppler, 8);
    Rng rng(mix_seed(mix_seed(h, bits_ds, bits_fd), seed));

    // Exponential power-delay profile, normalized to unit total power.
    const int taps = sc.num_taps;
    std::vector<double> tap_power(taps), tap_delay(taps);
    double psum = 0.0;
    for (int k = 0; k < taps; ++k) {
        tap_power[k] = std::exp(-3.0 * k / taps);
        tap_delay[k] = k * sc.delay_spread;
        psum += tap_power[k];
    }
    for (auto& p : tap_power) p /= psum;

    // Jakes sum-of-sinusoids per tap: random arrival angles and phases.
    std::vector<std::complex<double>> tap_gain(taps * kGridTime);
    for (int k = 0; k < taps; ++k) {
        double cos_a[kSinusoids], phase[kSinusoids];
        for (int n = 0; n < kSinusoids; ++n) {
            cos_a[n] = std::cos(rng.uniform(0.0, kTwoPi));
            phase[n] = rng.uniform(0.0, kTwoPi);
        }
        const double amp = std::sqrt(tap_power[k] / kSinusoids);
        for (int t = 0; t < kGridTime; ++t) {
            double re = 0.0, im = 0.0;
            for (int n = 0; n < kSinusoids; ++n) {
                const double arg = kTwoPi * sc.doppler * t * cos_a[n] + phase[n];
                re += std::cos(arg);
                im += std::sin(arg);
            }
            tap_gain[k * kGridTime + t] = {amp * re, amp * im};
        }
    }

    ChannelRealization ch;
    ch.scenario = sc;
    ch.snr_db = snr_db;
    ch.noise_variance = std::pow(10.0, -snr_db / 10.0);
    ch.gains.resize(kGridTime * kGridFreq);
    std::vector<std::complex<double>> ramp(taps);
    for (int f = 0; f < kGridFreq; ++f) {
        // DFT phase ramp per tap at this subcarrier
        for (int k = 0; k < taps; ++k) {
            const double arg = -kTwoPi * f * tap_delay[k] / kGridFreq;
            ramp[k] = {std::cos(arg), std::sin(arg)};
        }
        for (int t = 0; t < kGridTime; ++t) {
            std::complex<double> acc = 0.0;
            for (int k = 0; k < taps; ++k) acc += tap_gain[k * kGridTime + t] * ramp[k];
            ch.gains[t * kGridFreq + f] = acc;
        }
    }
    return ch;
}

CsiFeatures csi_features(const ChannelRealization& ch) {
    CsiFeatures out;
    out.m.resize(kGridTime * kCsiCols);
    for (int t = 0; t < kGridTime; ++t) {
        for (int f = 0; f < kGridFreq; ++f) {
            const double mag = std::abs(ch.gain(t, f));
            double db = 20.0 * std::log10(mag + 1e-12);
            db = std::clamp(db, -40.0, 20.0);
            out.m[t * kCsiCols + f] = static_cast<float>(db);
        }
        out.m[t * kCsiCols + kGridFreq] = static_cast<float>(ch.snr_db);
    }
    return out;
}

}  // namespace linkforge
