#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "linkforge/modem.hpp"
#include "linkforge/rng.hpp"

using namespace linkforge;

namespace {

std::vector<std::complex<double>> all_points(ModScheme mod) {
    const int m = bits_per_symbol(mod);
    std::vector<std::complex<double>> pts;
    for (int pat = 0; pat < (1 << m); ++pat) {
        uint8_t bits[6];
        for (int j = 0; j < m; ++j) bits[j] = uint8_t((pat >> j) & 1);
        pts.push_back(modulate_symbol(bits, mod));
    }
    return pts;
}

}  // namespace

TEST_SUITE("modem") {

TEST_CASE("BPSK maps 0 to +1 and 1 to -1") {
    uint8_t zero = 0, one = 1;
    CHECK(modulate_symbol(&zero, ModScheme::BPSK) == std::complex<double>(1.0, 0.0));
    CHECK(modulate_symbol(&one, ModScheme::BPSK) == std::complex<double>(-1.0, 0.0));
}

TEST_CASE("every constellation has unit average energy") {
    for (ModScheme mod :
         {ModScheme::BPSK, ModScheme::QPSK, ModScheme::QAM16, ModScheme::QAM64}) {
        auto pts = all_points(mod);
        double e = 0.0;
        for (auto p : pts) e += std::norm(p);
        CHECK(e / pts.size() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("constellation scales match the unit-energy normalization") {
    CHECK(constellation_scale(ModScheme::BPSK) == doctest::Approx(1.0));
    CHECK(constellation_scale(ModScheme::QPSK) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(constellation_scale(ModScheme::QAM16) == doctest::Approx(1.0 / std::sqrt(10.0)));
    CHECK(constellation_scale(ModScheme::QAM64) == doctest::Approx(1.0 / std::sqrt(42.0)));
}

TEST_CASE("noise-free round trip over random bits") {
    Rng rng(123);
    for (ModScheme mod :
         {ModScheme::BPSK, ModScheme::QPSK, ModScheme::QAM16, ModScheme::QAM64}) {
        const int m = bits_per_symbol(mod);
        for (int k = 0; k < 10000 / m; ++k) {
            uint8_t in[6], out[6];
            for (int j = 0; j < m; ++j) in[j] = uint8_t(rng.next_u64() & 1);
            demodulate_symbol(modulate_symbol(in, mod), mod, out);
            for (int j = 0; j < m; ++j) REQUIRE(in[j] == out[j]);
        }
    }
}

TEST_CASE("nearest-neighbour points differ in exactly one bit") {
    for (ModScheme mod : {ModScheme::QPSK, ModScheme::QAM16, ModScheme::QAM64}) {
        const int m = bits_per_symbol(mod);
        auto pts = all_points(mod);
        double dmin = 1e9;
        for (size_t a = 0; a < pts.size(); ++a)
            for (size_t b = a + 1; b < pts.size(); ++b)
                dmin = std::min(dmin, std::abs(pts[a] - pts[b]));
        for (size_t a = 0; a < pts.size(); ++a) {
            for (size_t b = a + 1; b < pts.size(); ++b) {
                if (std::abs(pts[a] - pts[b]) > dmin * 1.001) continue;
                int diff = 0;
                for (int j = 0; j < m; ++j) diff += ((a >> j) & 1) != ((b >> j) & 1);
                REQUIRE(diff == 1);  // Gray labeling
            }
        }
    }
}

TEST_CASE("decisions survive sub-threshold perturbations") {
    Rng rng(321);
    for (ModScheme mod : {ModScheme::QPSK, ModScheme::QAM16, ModScheme::QAM64}) {
        const int m = bits_per_symbol(mod);
        auto pts = all_points(mod);
        double dmin = 1e9;
        for (size_t a = 0; a < pts.size(); ++a)
            for (size_t b = a + 1; b < pts.size(); ++b)
                dmin = std::min(dmin, std::abs(pts[a] - pts[b]));
        for (int k = 0; k < 200; ++k) {
            uint8_t in[6], out[6];
            for (int j = 0; j < m; ++j) in[j] = uint8_t(rng.next_u64() & 1);
            const double ang = rng.uniform(0.0, 6.283185307179586);
            const std::complex<double> nudge =
                0.49 * dmin * std::complex<double>(std::cos(ang), std::sin(ang));
            demodulate_symbol(modulate_symbol(in, mod) + nudge, mod, out);
            for (int j = 0; j < m; ++j) REQUIRE(in[j] == out[j]);
        }
    }
}

TEST_CASE("out-of-range samples clamp to the outermost level") {
    uint8_t out[6];
    demodulate_symbol({50.0, 0.0}, ModScheme::BPSK, out);
    CHECK(out[0] == 0);
    demodulate_symbol({-50.0, 0.0}, ModScheme::BPSK, out);
    CHECK(out[0] == 1);
    // far corner decodes to the corner constellation point
    demodulate_symbol({9.0, 9.0}, ModScheme::QAM64, out);
    uint8_t back[6];
    auto corner = modulate_symbol(out, ModScheme::QAM64);
    CHECK(corner.real() == doctest::Approx(7.0 / std::sqrt(42.0)));
    CHECK(corner.imag() == doctest::Approx(7.0 / std::sqrt(42.0)));
    demodulate_symbol(corner, ModScheme::QAM64, back);
    for (int j = 0; j < 6; ++j) CHECK(out[j] == back[j]);
}

}  // TEST_SUITE
