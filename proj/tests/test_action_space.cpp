#include "doctest.h"
#include "linkforge/action_space.hpp"
#include "linkforge/errors.hpp"

using namespace linkforge;

TEST_SUITE("action_space") {

TEST_CASE("all-zero indices decode to the first option of every module") {
    ConfigIndices idx{};
    LinkConfig cfg = index_to_config(idx);
    CHECK(cfg.coding == Coding::Uncoded);
    CHECK(cfg.spreading == 1);
    CHECK(cfg.modulation == ModScheme::BPSK);
    CHECK(cfg.power == doctest::Approx(0.25));
    CHECK(cfg.allocation == 16);
    CHECK(cfg.estimation == Estimation::Perfect);
    CHECK(cfg.equalization == Equalization::ZF);
    CHECK(cfg.harq == Harq::Off);
}

TEST_CASE("max indices decode to the last option of every module") {
    ConfigIndices idx{4, 3, 3, 2, 2, 1, 1, 2};
    LinkConfig cfg = index_to_config(idx);
    CHECK(cfg.coding == Coding::ConvR12);
    CHECK(cfg.spreading == 8);
    CHECK(cfg.modulation == ModScheme::QAM64);
    CHECK(cfg.power == doctest::Approx(1.0));
    CHECK(cfg.allocation == 64);
    CHECK(cfg.estimation == Estimation::LSPilot);
    CHECK(cfg.equalization == Equalization::MMSE);
    CHECK(cfg.harq == Harq::Chase2);
}

TEST_CASE("total space is the product of the option counts") {
    const auto& cat = ModuleCatalog::instance();
    CHECK(cat.option_count(0) == 5);
    CHECK(cat.option_count(1) == 4);
    CHECK(cat.option_count(2) == 4);
    CHECK(cat.option_count(3) == 3);
    CHECK(cat.option_count(4) == 3);
    CHECK(cat.option_count(5) == 2);
    CHECK(cat.option_count(6) == 2);
    CHECK(cat.option_count(7) == 3);
    CHECK(cat.total_configs() == 5 * 4 * 4 * 3 * 3 * 2 * 2 * 3);
    CHECK(cat.total_configs() == 8640);
}

TEST_CASE("flatten and config round trips are the identity over the full space") {
    const auto& cat = ModuleCatalog::instance();
    for (int flat = 0; flat < cat.total_configs(); ++flat) {
        ConfigIndices idx = unflatten_indices(flat);
        REQUIRE(flatten_indices(idx) == flat);
        LinkConfig cfg = index_to_config(idx);
        REQUIRE(config_to_index(cfg) == idx);
    }
}

TEST_CASE("out-of-range indices are rejected") {
    CHECK_THROWS_AS(index_to_config(ConfigIndices{5, 0, 0, 0, 0, 0, 0, 0}), ConfigError);
    CHECK_THROWS_AS(index_to_config(ConfigIndices{0, 0, 0, 0, 0, 0, 0, 3}), ConfigError);
    CHECK_THROWS_AS(index_to_config(ConfigIndices{-1, 0, 0, 0, 0, 0, 0, 0}), ConfigError);
    CHECK_THROWS_AS(unflatten_indices(-1), ConfigError);
    CHECK_THROWS_AS(unflatten_indices(ModuleCatalog::instance().total_configs()), ConfigError);
}

TEST_CASE("complexity cost sums the catalog entries") {
    LinkConfig cfg;  // first options
    cfg.modulation = ModScheme::BPSK;
    cfg.allocation = 64;
    CHECK(complexity_cost(cfg) == 2);  // bpsk 1 + zf 1

    LinkConfig top = index_to_config(ConfigIndices{4, 3, 3, 2, 2, 1, 1, 2});
    CHECK(complexity_cost(top) == 5 + 3 + 3 + 0 + 0 + 2 + 3 + 3);
    CHECK(complexity_max() == 19);
}

TEST_CASE("nominal rate follows the closed form") {
    LinkConfig cfg;
    cfg.allocation = 64;
    CHECK(nominal_rate(cfg) == doctest::Approx(1.0));  // uncoded bpsk full band

    LinkConfig h;
    h.coding = Coding::Hamming74;
    h.spreading = 2;
    h.modulation = ModScheme::QPSK;
    h.power = 1.0;
    h.allocation = 32;
    h.equalization = Equalization::MMSE;
    CHECK(nominal_rate(h) == doctest::Approx((4.0 / 7.0) * 2 * 0.5 * 0.5));

    LinkConfig p = h;
    p.estimation = Estimation::LSPilot;  // 4 pilots out of 32
    CHECK(nominal_rate(p) == doctest::Approx((4.0 / 7.0) * 2 * 0.5 * 0.5 * (28.0 / 32.0)));
}

TEST_CASE("rate_max bounds every config and is reached") {
    const auto& cat = ModuleCatalog::instance();
    double best = 0.0;
    for (int flat = 0; flat < cat.total_configs(); ++flat)
        best = std::max(best, nominal_rate(index_to_config(unflatten_indices(flat))));
    CHECK(rate_max() == doctest::Approx(best));
    CHECK(rate_max() == doctest::Approx(6.0));  // uncoded qam64 full band sf1
}

TEST_CASE("pilot subcarriers only count under LS estimation") {
    LinkConfig cfg;
    CHECK(pilot_subcarriers(cfg) == 0);
    cfg.estimation = Estimation::LSPilot;
    cfg.allocation = 16;
    CHECK(pilot_subcarriers(cfg) == 2);
    cfg.allocation = 64;
    CHECK(pilot_subcarriers(cfg) == 8);
}

TEST_CASE("manifest and fingerprint are stable and descriptive") {
    const auto& cat = ModuleCatalog::instance();
    CHECK(cat.fingerprint() == cat.fingerprint());
    CHECK(cat.manifest().find("coding") != std::string::npos);
    CHECK(cat.manifest().find("harq") != std::string::npos);
    CHECK(config_to_string(LinkConfig{}).find("coding=uncoded") != std::string::npos);
}

}  // TEST_SUITE
