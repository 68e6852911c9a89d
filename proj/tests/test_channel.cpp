#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "linkforge/channel.hpp"
#include "linkforge/errors.hpp"

using namespace linkforge;

TEST_SUITE("channel") {

TEST_CASE("noise variance follows the SNR in dB") {
    auto sc = scenario_by_name("urban");
    CHECK(generate_channel(sc, 0.0, 1).noise_variance == doctest::Approx(1.0));
    CHECK(generate_channel(sc, 10.0, 1).noise_variance == doctest::Approx(0.1));
    CHECK(generate_channel(sc, -5.0, 1).noise_variance ==
          doctest::Approx(std::pow(10.0, 0.5)));
}

TEST_CASE("non-finite SNR is rejected") {
    auto sc = scenario_by_name("rural");
    CHECK_THROWS_AS(generate_channel(sc, std::nan(""), 1), ConfigError);
    CHECK_THROWS_AS(generate_channel(sc, INFINITY, 1), ConfigError);
}

TEST_CASE("zero Doppler freezes the channel across time") {
    Scenario sc = scenario_by_name("rural");
    sc.doppler = 0.0;
    auto ch = generate_channel(sc, 10.0, 3);
    for (int t = 1; t < kGridTime; ++t)
        for (int f = 0; f < kGridFreq; ++f)
            REQUIRE(ch.gain(t, f) == ch.gain(0, f));
}

TEST_CASE("identical inputs give bit-identical realizations") {
    auto sc = scenario_by_name("urban");
    auto a = generate_channel(sc, 10.0, 7);
    auto b = generate_channel(sc, 10.0, 7);
    REQUIRE(a.gains == b.gains);
    auto c = generate_channel(sc, 10.0, 8);
    CHECK(a.gains != c.gains);
}

TEST_CASE("average channel power is one across seeds") {
    for (const auto& sc : builtin_scenarios()) {
        double total = 0.0;
        const int seeds = 200;
        for (int s = 0; s < seeds; ++s) {
            auto ch = generate_channel(sc, 10.0, 1000 + s);
            double p = 0.0;
            for (const auto& g : ch.gains) p += std::norm(g);
            total += p / ch.gains.size();
        }
        CHECK(total / seeds == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("per-realization power stays near one") {
    auto ch = generate_channel(scenario_by_name("highway"), 5.0, 11);
    double p = 0.0;
    for (const auto& g : ch.gains) p += std::norm(g);
    CHECK(p / ch.gains.size() == doctest::Approx(1.0).epsilon(0.15));
}

static double lag1_autocorr(const Scenario& sc, int seeds) {
    double num = 0.0, den = 0.0;
    for (int s = 0; s < seeds; ++s) {
        auto ch = generate_channel(sc, 10.0, 5000 + s);
        for (int f = 0; f < kGridFreq; ++f) {
            for (int t = 0; t + 1 < kGridTime; ++t) {
                num += (ch.gain(t, f) * std::conj(ch.gain(t + 1, f))).real();
                den += std::norm(ch.gain(t, f));
            }
        }
    }
    return num / den;
}

TEST_CASE("faster Doppler decorrelates adjacent symbols") {
    const double rural = lag1_autocorr(scenario_by_name("rural"), 200);
    const double urban = lag1_autocorr(scenario_by_name("urban"), 200);
    const double highway = lag1_autocorr(scenario_by_name("highway"), 200);
    CHECK(rural > urban);
    CHECK(urban > highway);
}

TEST_CASE("CSI features map magnitudes to clipped dB plus an SNR column") {
    ChannelRealization ch;
    ch.gains.assign(size_t(kGridTime) * kGridFreq, {1.0, 0.0});
    ch.snr_db = 7.5;
    ch.gains[0] = {0.0, 0.0};
    ch.gains[1] = {10.0, 0.0};
    ch.gains[2] = {0.1, 0.0};
    auto csi = csi_features(ch);
    REQUIRE(csi.m.size() == size_t(kGridTime) * kCsiCols);
    CHECK(csi.at(0, 0) == doctest::Approx(-40.0));
    CHECK(csi.at(0, 1) == doctest::Approx(20.0));
    CHECK(csi.at(0, 2) == doctest::Approx(-20.0).epsilon(1e-5));
    CHECK(csi.at(0, 3) == doctest::Approx(0.0));
    for (int t = 0; t < kGridTime; ++t) {
        CHECK(csi.at(t, kGridFreq) == doctest::Approx(7.5));
        for (int c = 0; c < kGridFreq; ++c) {
            REQUIRE(csi.at(t, c) >= -40.0);
            REQUIRE(csi.at(t, c) <= 20.0);
        }
    }
}

TEST_CASE("builtin scenarios carry the documented profiles") {
    auto urban = scenario_by_name("urban");
    CHECK(urban.num_taps == 6);
    CHECK(urban.doppler == doctest::Approx(0.01));
    auto rural = scenario_by_name("rural");
    CHECK(rural.num_taps == 3);
    CHECK(rural.doppler == doctest::Approx(0.005));
    auto highway = scenario_by_name("highway");
    CHECK(highway.num_taps == 4);
    CHECK(highway.doppler == doctest::Approx(0.05));
    CHECK_THROWS_AS(scenario_by_name("orbit"), ConfigError);
}

TEST_CASE("scenario profile files round trip") {
    const char* path = "test_profiles.tmp";
    {
        std::ofstream f(path);
        f << "[lab]\ntaps = 2\ndelay_spread = 1.5\ndoppler = 0.02\n"
          << "[anechoic]\ntaps = 1\ndelay_spread = 0\ndoppler = 0\n";
    }
    auto list = load_scenario_profiles(path);
    REQUIRE(list.size() == 2);
    auto lab = scenario_from_list(list, "lab");
    CHECK(lab.num_taps == 2);
    CHECK(lab.delay_spread == doctest::Approx(1.5));
    CHECK(lab.doppler == doctest::Approx(0.02));
    CHECK_THROWS_AS(scenario_from_list(list, "urban"), ConfigError);
    CHECK_THROWS_AS(load_scenario_profiles("no_such_file.tmp"), DataError);
    std::remove(path);
}

}  // TEST_SUITE
