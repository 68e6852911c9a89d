#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"
#include "linkforge/nn/adam.hpp"
#include "linkforge/policy.hpp"

using namespace linkforge;

namespace {

CsiFeatures sample_csi(double snr_db, uint64_t seed) {
    return csi_features(generate_channel(scenario_by_name("urban"), snr_db, seed));
}

std::vector<int> sample_tokens(PrefClass cls, uint64_t seed) {
    return generate_intent(cls, scenario_by_name("urban"), seed).tokens;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("fresh networks emit exactly uniform heads") {
    PolicyNet net(3);
    auto out = net.forward(sample_csi(10.0, 1), sample_tokens(PrefClass::LowBER, 2));
    const auto& cat = ModuleCatalog::instance();
    for (int m = 0; m < kNumModules; ++m) {
        REQUIRE(out.dists[m].size() == size_t(cat.option_count(m)));
        for (double p : out.dists[m])
            CHECK(p == doctest::Approx(1.0 / cat.option_count(m)).epsilon(1e-12));
    }
    CHECK(out.p_hat.rel == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(out.p_hat.thr == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(out.p_hat.cmp == doctest::Approx(1.0 / 3).epsilon(1e-12));
    REQUIRE(out.pooled.size() == size_t(kModelDim));
}

TEST_CASE("log_prob sums the per-module log probabilities") {
    PolicyNet net(4);
    auto out = net.forward(sample_csi(6.0, 9), sample_tokens(PrefClass::HighRate, 5));
    ConfigIndices idx{1, 2, 0, 1, 2, 0, 1, 2};
    double expect = 0.0;
    for (int m = 0; m < kNumModules; ++m) expect += std::log(out.dists[m][idx[m]]);
    CHECK(out.log_prob(idx) == doctest::Approx(expect).epsilon(1e-12));

    // uniform start: log prob of any action is -ln(total configs)
    CHECK(out.log_prob(idx) ==
          doctest::Approx(-std::log(double(ModuleCatalog::instance().total_configs())))
              .epsilon(1e-9));
}

TEST_CASE("forward is deterministic and input-sensitive after training steps") {
    PolicyNet net(5);
    auto csi = sample_csi(12.0, 3);
    auto tok = sample_tokens(PrefClass::LowBER, 4);

    // a few gradient steps break the uniform symmetry
    nn::Adam opt(net.params(), 1e-2);
    ConfigIndices target{4, 3, 3, 2, 2, 1, 1, 2};
    for (int i = 0; i < 5; ++i) {
        net.accumulate_gradients(csi, tok, target, PrefClass::LowBER, 1.0, 1.0, 0.0);
        opt.step();
    }
    auto a = net.forward(csi, tok);
    auto b = net.forward(csi, tok);
    CHECK(a.dists[0] == b.dists[0]);
    CHECK(a.p_hat.rel == b.p_hat.rel);
    CHECK(a.dists[0][4] > 1.0 / 5);  // target option gained mass

    auto other = net.forward(sample_csi(-2.0, 8), sample_tokens(PrefClass::HighRate, 6));
    bool differs = false;
    for (int m = 0; m < kNumModules && !differs; ++m)
        for (size_t o = 0; o < a.dists[m].size(); ++o)
            if (a.dists[m][o] != other.dists[m][o]) {
                differs = true;
                break;
            }
    CHECK(differs);
}

TEST_CASE("loss terms agree with the reported distributions") {
    PolicyNet net(6);
    auto csi = sample_csi(8.0, 2);
    auto tok = sample_tokens(PrefClass::Conventional, 3);
    ConfigIndices act{0, 1, 2, 0, 1, 0, 1, 0};
    auto out = net.forward(csi, tok);
    auto t = net.accumulate_gradients(csi, tok, act, PrefClass::Conventional, 0.7, 0.2, 0.01);
    CHECK(t.nll_action == doctest::Approx(-out.log_prob(act)).epsilon(1e-9));
    CHECK(t.ce_pref == doctest::Approx(-std::log(1.0 / 3)).epsilon(1e-9));
    double ent = 0.0;
    for (int m = 0; m < kNumModules; ++m)
        ent += std::log(double(ModuleCatalog::instance().option_count(m)));
    CHECK(t.entropy == doctest::Approx(ent).epsilon(1e-9));
    CHECK(t.loss ==
          doctest::Approx(0.7 * t.nll_action + 0.2 * t.ce_pref + 0.01 * t.entropy).epsilon(1e-9));
    CHECK(t.pref_argmax >= 0);
    CHECK(t.pref_argmax < 3);
}

TEST_CASE("two networks with the same init seed agree, different seeds differ") {
    PolicyNet a(11), b(11), c(12);
    auto csi = sample_csi(4.0, 7);
    auto tok = sample_tokens(PrefClass::HighRate, 1);
    auto oa = a.forward(csi, tok);
    auto ob = b.forward(csi, tok);
    CHECK(oa.pooled == ob.pooled);
    auto oc = c.forward(csi, tok);
    CHECK(oa.pooled != oc.pooled);
    CHECK(a.op_count() == c.op_count());
}

TEST_CASE("checkpoint round trip preserves every parameter") {
    const char* path = "test_policy_ckpt.tmp";
    PolicyNet a(21);
    // move off the zero-init manifolds so the round trip is non-trivial
    nn::Adam opt(a.params(), 5e-3);
    auto csi = sample_csi(9.0, 4);
    auto tok = sample_tokens(PrefClass::LowBER, 9);
    for (int i = 0; i < 3; ++i) {
        a.accumulate_gradients(csi, tok, ConfigIndices{1, 1, 1, 1, 1, 1, 1, 1},
                               PrefClass::HighRate, 1.0, 1.0, 0.001);
        opt.step();
    }
    a.save(path);

    PolicyNet b(99);
    b.load(path);
    for (const auto& e : a.params().entries()) {
        const nn::Tensor* src = e.second.get();
        const nn::Tensor* dst = b.params().find(e.first);
        REQUIRE(dst != nullptr);
        REQUIRE(dst->v == src->v);
    }
    auto oa = a.forward(csi, tok);
    auto ob = b.forward(csi, tok);
    CHECK(oa.dists[3] == ob.dists[3]);
    CHECK(oa.p_hat.thr == ob.p_hat.thr);
    std::remove(path);
}

TEST_CASE("loading rejects missing and corrupt files") {
    PolicyNet net(1);
    CHECK_THROWS_AS(net.load("no_such_checkpoint.bin"), DataError);

    const char* path = "test_policy_bad.tmp";
    {
        FILE* f = std::fopen(path, "wb");
        REQUIRE(f != nullptr);
        const char junk[] = "not a checkpoint";
        std::fwrite(junk, 1, sizeof junk, f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(net.load(path), DataError);
    std::remove(path);

    // truncated real checkpoint
    const char* good = "test_policy_good.tmp";
    const char* cut = "test_policy_cut.tmp";
    net.save(good);
    {
        FILE* in = std::fopen(good, "rb");
        REQUIRE(in != nullptr);
        std::fseek(in, 0, SEEK_END);
        long n = std::ftell(in) / 2;
        std::fseek(in, 0, SEEK_SET);
        std::vector<char> buf(static_cast<size_t>(n));
        REQUIRE(std::fread(buf.data(), 1, buf.size(), in) == buf.size());
        std::fclose(in);
        FILE* out = std::fopen(cut, "wb");
        REQUIRE(out != nullptr);
        std::fwrite(buf.data(), 1, buf.size(), out);
        std::fclose(out);
    }
    CHECK_THROWS_AS(net.load(cut), DataError);
    std::remove(good);
    std::remove(cut);
}

TEST_CASE("sampling follows the head distributions") {
    PolicyNet net(31);
    auto out = net.forward(sample_csi(5.0, 6), sample_tokens(PrefClass::Conventional, 7));
    Rng rng(99);
    const int draws = 20000;
    std::vector<int> counts(5, 0);
    double lp = 0.0;
    for (int i = 0; i < draws; ++i) {
        auto idx = sample_action(out, rng, &lp);
        CHECK(lp == doctest::Approx(out.log_prob(idx)).epsilon(1e-9));
        counts[idx[0]]++;
    }
    for (int o = 0; o < 5; ++o)
        CHECK(std::abs(counts[o] / double(draws) - 0.2) < 0.02);  // uniform head
}

TEST_CASE("greedy action is the per-head argmax") {
    PolicyNet net(41);
    auto csi = sample_csi(14.0, 8);
    auto tok = sample_tokens(PrefClass::HighRate, 3);
    nn::Adam opt(net.params(), 1e-2);
    ConfigIndices target{2, 0, 3, 1, 0, 1, 0, 2};
    for (int i = 0; i < 8; ++i) {
        net.accumulate_gradients(csi, tok, target, PrefClass::HighRate, 1.0, 0.0, 0.0);
        opt.step();
    }
    auto out = net.forward(csi, tok);
    auto g = greedy_action(out);
    for (int m = 0; m < kNumModules; ++m) {
        int arg = 0;
        for (size_t o = 1; o < out.dists[m].size(); ++o)
            if (out.dists[m][o] > out.dists[m][arg]) arg = int(o);
        CHECK(g[m] == arg);
    }
    CHECK(g == target);  // eight supervised steps pin every head
}

TEST_CASE("malformed inputs are rejected") {
    PolicyNet net(51);
    auto csi = sample_csi(3.0, 2);
    std::vector<int> tok = sample_tokens(PrefClass::LowBER, 1);
    std::vector<int> short_tok(tok.begin(), tok.begin() + 5);
    CHECK_THROWS_AS(net.forward(csi, short_tok), ConfigError);
    std::vector<int> bad_tok = tok;
    bad_tok[0] = kVocabSize + 5;
    CHECK_THROWS_AS(net.forward(csi, bad_tok), ConfigError);
    CsiFeatures bad_csi = csi;
    bad_csi.m.pop_back();
    CHECK_THROWS_AS(net.forward(bad_csi, tok), ConfigError);
}

}  // TEST_SUITE
