#pragma once

#include <cstdint>

#include "linkforge/action_space.hpp"
#include "linkforge/channel.hpp"
#include "linkforge/codec.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

struct Payload {
    Bits bits;  // info bits, length > 0 and divisible by 8
};

Payload random_payload(int length, uint64_t seed);

struct LinkMetrics {
    double ber = 0.0;
    double goodput = 0.0;            // info bits per channel use
    double complexity = 0.0;
    double avg_transmissions = 1.0;  // attempts consumed by HARQ
};

enum class SimStatus { Ok, Infeasible };

struct SimResult {
    SimStatus status = SimStatus::Ok;
    LinkMetrics metrics;
};

// A config is usable only when one coded block fits into the data cells of a
// single frame after spreading and modulation.
bool config_feasible(const LinkConfig& config, int payload_bits);

// One end-to-end transmission: CRC append, encode, spread, modulate, power
// scale, map over the allocated subcarriers time-slot by time-slot, per-cell
// fading plus AWGN, estimation, equalization, hard demodulation, despreading,
// decoding, and Chase-combining HARQ gated by the CRC. Identical inputs give
// identical metrics.
SimResult simulate_link(const LinkConfig& config, const ChannelRealization& ch,
                        const Payload& payload, uint64_t seed);

}  // namespace linkforge
