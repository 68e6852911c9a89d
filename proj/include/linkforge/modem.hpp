#pragma once

#include <complex>
#include <cstdint>

#include "linkforge/action_space.hpp"

namespace linkforge {

// Gray-mapped square constellations, unit average symbol energy. Per-symbol
// bits split axis-first: the leading half selects the in-phase level, the
// trailing half the quadrature level (BPSK uses the real axis only).
std::complex<double> modulate_symbol(const uint8_t* bits, ModScheme mod);

// Nearest-level hard decision; writes bits_per_symbol(mod) bits.
void demodulate_symbol(std::complex<double> z, ModScheme mod, uint8_t* bits_out);

double constellation_scale(ModScheme mod);  // amplitude of the unit level

}  // namespace linkforge
