#include <cmath>
#include <complex>

#include "doctest.h"
#include "linkforge/channel.hpp"
#include "linkforge/errors.hpp"
#include "linkforge/phy.hpp"

using namespace linkforge;

namespace {

ChannelRealization flat_channel(double snr_db) {
    ChannelRealization ch;
    ch.gains.assign(size_t(kGridTime) * kGridFreq, {1.0, 0.0});
    ch.noise_variance = std::pow(10.0, -snr_db / 10.0);
    ch.snr_db = snr_db;
    ch.scenario = scenario_by_name("rural");
    return ch;
}

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

struct BerRun {
    double mean = 0.0;
    double se = 0.0;
};

BerRun measure_ber(const LinkConfig& cfg, const ChannelRealization& ch, int payload_bits,
                   int sims, uint64_t seed) {
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < sims; ++i) {
        Payload p = random_payload(payload_bits, mix_seed(seed, i, 1));
        auto r = simulate_link(cfg, ch, p, mix_seed(seed, i, 2));
        REQUIRE(r.status == SimStatus::Ok);
        sum += r.metrics.ber;
        sq += r.metrics.ber * r.metrics.ber;
    }
    BerRun out;
    out.mean = sum / sims;
    const double var = std::max(0.0, sq / sims - out.mean * out.mean);
    out.se = std::sqrt(var / sims);
    return out;
}

}  // namespace

TEST_SUITE("phy") {

TEST_CASE("random payloads are deterministic, sized, and balanced") {
    Payload a = random_payload(1024, 5);
    Payload b = random_payload(1024, 5);
    REQUIRE(a.bits == b.bits);
    CHECK(random_payload(1024, 6).bits != a.bits);
    int ones = 0;
    for (auto bit : a.bits) ones += bit;
    CHECK(ones > 400);
    CHECK(ones < 624);
    CHECK_THROWS_AS(random_payload(0, 1), ConfigError);
    CHECK_THROWS_AS(random_payload(12, 1), ConfigError);
}

TEST_CASE("uncoded BPSK on flat AWGN matches the Q-function") {
    LinkConfig cfg;
    cfg.modulation = ModScheme::BPSK;
    cfg.power = 1.0;
    cfg.allocation = 64;
    for (double snr : {0.0, 2.0, 4.0}) {
        const double expected = q_func(std::sqrt(2.0 * std::pow(10.0, snr / 10.0)));
        auto run = measure_ber(cfg, flat_channel(snr), 1008, 25, 42);
        const double slack = 4.0 * std::max(run.se, 1e-4);
        CHECK(std::abs(run.mean - expected) < slack);
    }
}

TEST_CASE("feasibility asks one decodable block to fit a frame") {
    LinkConfig cfg;  // uncoded bpsk sf1 alloc16: the block is a single bit
    CHECK(config_feasible(cfg, 224));
    CHECK(config_feasible(cfg, 4096));  // long payloads wrap onto more frames

    LinkConfig conv;  // the terminated stream decodes as one block
    conv.coding = Coding::ConvR12;
    CHECK_FALSE(config_feasible(conv, 224));  // 2*(240+6) = 492 symbols > 256 cells
    conv.allocation = 32;
    CHECK(config_feasible(conv, 224));        // 492 <= 512
    conv.allocation = 64;
    CHECK_FALSE(config_feasible(conv, 1024)); // 2092 > 1024
    conv.modulation = ModScheme::QAM64;
    CHECK(config_feasible(conv, 1024));       // ceil(2092/6) = 349
    conv.estimation = Estimation::LSPilot;    // 8 pilots shrink the budget
    CHECK(config_feasible(conv, 1024));       // 349 <= 896
    conv.modulation = ModScheme::BPSK;
    conv.spreading = 2;
    CHECK_FALSE(config_feasible(conv, 224));  // 984 chips > 896 cells
}

TEST_CASE("infeasible configs report the sentinel instead of simulating") {
    LinkConfig cfg;  // conv block of 2092 symbols outgrows even alloc 64
    cfg.coding = Coding::ConvR12;
    cfg.allocation = 64;
    auto ch = flat_channel(10.0);
    auto r = simulate_link(cfg, ch, random_payload(1024, 1), 9);
    CHECK(r.status == SimStatus::Infeasible);
    CHECK(r.metrics.ber == doctest::Approx(0.5));
    CHECK(r.metrics.goodput == doctest::Approx(0.0));
    CHECK(r.metrics.complexity == doctest::Approx(complexity_cost(cfg)));
}

TEST_CASE("payloads longer than one frame wrap and still round-trip") {
    LinkConfig cfg;  // alloc16 with pilots leaves 224 data cells per frame
    cfg.estimation = Estimation::LSPilot;
    auto ch = flat_channel(10.0);
    ch.noise_variance = 1e-12;
    auto r = simulate_link(cfg, ch, random_payload(1024, 3), 21);
    REQUIRE(r.status == SimStatus::Ok);
    CHECK(r.metrics.ber == 0.0);
    CHECK(r.metrics.goodput == doctest::Approx(nominal_rate(cfg)));
}

TEST_CASE("zero-noise round trip holds for every feasible config on a flat channel") {
    auto ch = flat_channel(10.0);
    ch.noise_variance = 1e-12;
    const auto& cat = ModuleCatalog::instance();
    int feasible = 0;
    for (int flat = 0; flat < cat.total_configs(); ++flat) {
        LinkConfig cfg = index_to_config(unflatten_indices(flat));
        Payload p = random_payload(64, 1234 + flat);
        auto r = simulate_link(cfg, ch, p, 77);
        if (r.status == SimStatus::Infeasible) {
            REQUIRE_FALSE(config_feasible(cfg, 64));
            continue;
        }
        ++feasible;
        REQUIRE(r.metrics.ber == 0.0);
        REQUIRE(r.metrics.avg_transmissions == doctest::Approx(1.0));
        REQUIRE(r.metrics.goodput == doctest::Approx(nominal_rate(cfg)));
    }
    CHECK(feasible > 5000);
}

TEST_CASE("zero-noise round trip holds on fading channels with perfect estimation") {
    auto ch = generate_channel(scenario_by_name("urban"), 10.0, 40);
    ch.noise_variance = 1e-12;
    const auto& cat = ModuleCatalog::instance();
    int checked = 0;
    for (int flat = 0; flat < cat.total_configs(); flat += 17) {
        LinkConfig cfg = index_to_config(unflatten_indices(flat));
        if (cfg.estimation != Estimation::Perfect || !config_feasible(cfg, 64)) continue;
        auto r = simulate_link(cfg, ch, random_payload(64, 99 + flat), 7);
        REQUIRE(r.metrics.ber == 0.0);
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("repetition coding beats uncoded at equal symbol SNR") {
    LinkConfig uncoded;
    uncoded.modulation = ModScheme::BPSK;
    uncoded.power = 1.0;
    uncoded.allocation = 64;
    LinkConfig rep3 = uncoded;
    rep3.coding = Coding::Rep3;

    auto ch = flat_channel(2.0);
    auto u = measure_ber(uncoded, ch, 320, 320, 11);
    auto r = measure_ber(rep3, ch, 320, 320, 11);
    CHECK(r.mean < u.mean);       // > 1e5 bits each side
    CHECK(r.mean < 0.5 * u.mean);  // decisive margin at 2 dB
}

TEST_CASE("ZF and MMSE decisions coincide given the same estimate") {
    LinkConfig zf;
    zf.modulation = ModScheme::QAM64;
    zf.power = 1.0;
    zf.allocation = 64;
    LinkConfig mmse = zf;
    mmse.equalization = Equalization::MMSE;

    for (auto est : {Estimation::Perfect, Estimation::LSPilot}) {
        zf.estimation = est;
        mmse.estimation = est;
        auto ch = generate_channel(scenario_by_name("urban"), 20.0, 5);
        for (int i = 0; i < 50; ++i) {
            Payload p = random_payload(960, mix_seed(21, i, 1));
            auto a = simulate_link(zf, ch, p, mix_seed(21, i, 2));
            auto b = simulate_link(mmse, ch, p, mix_seed(21, i, 2));
            // identical noise, identical estimates: the per-bit decisions match
            REQUIRE(a.metrics.ber == b.metrics.ber);
            REQUIRE(a.metrics.goodput == b.metrics.goodput);
        }
    }
}

TEST_CASE("identical inputs give identical metrics") {
    LinkConfig cfg;
    cfg.coding = Coding::Hamming74;
    cfg.modulation = ModScheme::QPSK;
    cfg.allocation = 32;
    cfg.estimation = Estimation::LSPilot;
    cfg.harq = Harq::Chase1;
    auto ch = generate_channel(scenario_by_name("highway"), 6.0, 3);
    Payload p = random_payload(256, 8);
    auto a = simulate_link(cfg, ch, p, 55);
    auto b = simulate_link(cfg, ch, p, 55);
    CHECK(a.metrics.ber == b.metrics.ber);
    CHECK(a.metrics.goodput == b.metrics.goodput);
    CHECK(a.metrics.avg_transmissions == b.metrics.avg_transmissions);
    auto c = simulate_link(cfg, ch, p, 56);
    (void)c;  // different seed may differ; only determinism is asserted
}

TEST_CASE("average BER is non-increasing in SNR") {
    LinkConfig cfg;
    cfg.modulation = ModScheme::QPSK;
    cfg.power = 1.0;
    cfg.allocation = 64;
    const double snrs[] = {0.0, 5.0, 10.0, 15.0};
    double mean[4], se[4];
    for (int k = 0; k < 4; ++k) {
        double sum = 0.0, sq = 0.0;
        const int seeds = 50;
        for (int s = 0; s < seeds; ++s) {
            auto ch = generate_channel(scenario_by_name("urban"), snrs[k], 600 + s);
            auto r = simulate_link(cfg, ch, random_payload(504, 70 + s), 80 + s);
            sum += r.metrics.ber;
            sq += r.metrics.ber * r.metrics.ber;
        }
        mean[k] = sum / seeds;
        se[k] = std::sqrt(std::max(0.0, sq / seeds - mean[k] * mean[k]) / seeds);
    }
    for (int k = 0; k + 1 < 4; ++k) {
        const double se_diff = std::sqrt(se[k] * se[k] + se[k + 1] * se[k + 1]);
        CHECK(mean[k + 1] <= mean[k] + 2.0 * se_diff);
    }
}

TEST_CASE("Chase combining lowers BER and caps attempts") {
    LinkConfig off;
    off.modulation = ModScheme::BPSK;
    off.power = 1.0;
    off.allocation = 64;
    LinkConfig chase = off;
    chase.harq = Harq::Chase2;

    auto ch = flat_channel(0.0);
    double ber_off = 0.0, ber_chase = 0.0, att = 0.0;
    const int sims = 60;
    for (int i = 0; i < sims; ++i) {
        Payload p = random_payload(504, mix_seed(31, i, 1));
        auto a = simulate_link(off, ch, p, mix_seed(31, i, 2));
        auto b = simulate_link(chase, ch, p, mix_seed(31, i, 2));
        ber_off += a.metrics.ber;
        ber_chase += b.metrics.ber;
        att += b.metrics.avg_transmissions;
        REQUIRE(a.metrics.avg_transmissions == doctest::Approx(1.0));
        REQUIRE(b.metrics.avg_transmissions >= 1.0);
        REQUIRE(b.metrics.avg_transmissions <= 3.0);
    }
    CHECK(ber_chase < 0.5 * ber_off);
    CHECK(att / sims > 1.5);  // 0 dB forces retransmissions
}

TEST_CASE("goodput pays for HARQ attempts and needs the CRC to pass") {
    LinkConfig cfg;
    cfg.modulation = ModScheme::BPSK;
    cfg.power = 1.0;
    cfg.allocation = 64;
    cfg.harq = Harq::Chase2;
    auto good = simulate_link(cfg, flat_channel(20.0), random_payload(504, 2), 3);
    CHECK(good.metrics.avg_transmissions == doctest::Approx(1.0));
    CHECK(good.metrics.goodput == doctest::Approx(nominal_rate(cfg)));

    auto bad = simulate_link(cfg, flat_channel(-10.0), random_payload(504, 2), 3);
    if (bad.metrics.goodput > 0.0) {
        CHECK(bad.metrics.goodput ==
              doctest::Approx(nominal_rate(cfg) / bad.metrics.avg_transmissions));
    } else {
        CHECK(bad.metrics.avg_transmissions == doctest::Approx(3.0));
    }
}

}  // TEST_SUITE
