#include "linkforge/modem.hpp"

#include <algorithm>
#include <cmath>

#include "linkforge/errors.hpp"

namespace linkforge {

namespace {

// Level index 0..2^m-1 runs from the most negative amplitude upward; the bit
// pattern on each axis is the reflected Gray code of that index.
inline unsigned gray(unsigned i) { return i ^ (i >> 1); }

inline unsigned gray_inverse(unsigned g) {
    unsigned i = g;
    while (g >>= 1) i ^= g;
    return i;
}

inline int axis_levels(ModScheme mod) {
    switch (mod) {
        case ModScheme::BPSK: return 2;
        case ModScheme::QPSK: return 2;
        case ModScheme::QAM16: return 4;
        case ModScheme::QAM64: return 8;
    }
    throw ConfigError("unknown modulation scheme");
}

inline double axis_amplitude(unsigned index, int levels) {
    return 2.0 * static_cast<double>(index) - static_cast<double>(levels - 1);
}

inline unsigned pack_bits(const uint8_t* bits, int n) {
    unsigned v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | (bits[i] & 1u);
    return v;
}

inline void unpack_bits(unsigned v, int n, uint8_t* out) {
    for (int i = 0; i < n; ++i) out[i] = static_cast<uint8_t>((v >> (n - 1 - i)) & 1u);
}

inline unsigned slice_axis(double u, int levels) {
    double idx = std::round((u + static_cast<double>(levels - 1)) * 0.5);
    long i = std::lround(idx);
    i = std::clamp(i, 0l, static_cast<long>(levels - 1));
    return gray(static_cast<unsigned>(i));
}

}  // namespace

double constellation_scale(ModScheme mod) {
    switch (mod) {
        case ModScheme::BPSK: return 1.0;
        case ModScheme::QPSK: return 1.0 / std::sqrt(2.0);
        case ModScheme::QAM16: return 1.0 / std::sqrt(10.0);
        case ModScheme::QAM64: return 1.0 / std::sqrt(42.0);
    }
    throw ConfigError("unknown modulation scheme");
}

std::complex<double> modulate_symbol(const uint8_t* bits, ModScheme mod) {
    double scale = constellation_scale(mod);
    if (mod == ModScheme::BPSK) {
        return {bits[0] ? -1.0 : 1.0, 0.0};
    }
    int levels = axis_levels(mod);
    int m = bits_per_symbol(mod) / 2;
    unsigned gi = pack_bits(bits, m);
    unsigned gq = pack_bits(bits + m, m);
    double re = axis_amplitude(gray_inverse(gi), levels) * scale;
    double im = axis_amplitude(gray_inverse(gq), levels) * scale;
    return {re, im};
}

void demodulate_symbol(std::complex<double> z, ModScheme mod, uint8_t* bits_out) {
    if (mod == ModScheme::BPSK) {
        bits_out[0] = z.real() < 0.0 ? 1 : 0;
        return;
    }
    double scale = constellation_scale(mod);
    int levels = axis_levels(mod);
    int m = bits_per_symbol(mod) / 2;
    unpack_bits(slice_axis(z.real() / scale, levels), m, bits_out);
    unpack_bits(slice_axis(z.imag() / scale, levels), m, bits_out + m);
}

}  // namespace linkforge
