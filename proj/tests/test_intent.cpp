#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "linkforge/errors.hpp"
#include "linkforge/intent.hpp"

using namespace linkforge;

TEST_SUITE("intent") {

TEST_CASE("vocabulary starts with the specials and has no duplicates") {
    const auto& vocab = vocabulary();
    REQUIRE(vocab.size() >= 2);
    CHECK(vocab.size() <= size_t(kVocabSize));
    CHECK(vocab[kPadId] == "<pad>");
    CHECK(vocab[kUnkId] == "<unk>");
    std::set<std::string> seen(vocab.begin(), vocab.end());
    CHECK(seen.size() == vocab.size());
}

TEST_CASE("tokenize lowercases, splits, pads, and truncates") {
    auto t = tokenize("");
    REQUIRE(t.size() == size_t(kMaxTokens));
    for (int id : t) CHECK(id == kPadId);

    auto a = tokenize("Keep The LINK");
    auto b = tokenize("keep the link");
    CHECK(a == b);
    CHECK(a[3] == kPadId);

    CHECK(tokenize("zzqx9 unknownword")[0] == kUnkId);

    std::string longtext;
    for (int i = 0; i < 40; ++i) longtext += "link ";
    auto c = tokenize(longtext);
    CHECK(c.size() == size_t(kMaxTokens));
    CHECK(c[kMaxTokens - 1] != kPadId);
}

TEST_CASE("punctuation separates words the same way spaces do") {
    CHECK(tokenize("low-latency, link!") == tokenize("low latency link"));
}

TEST_CASE("generated intents stay inside the vocabulary") {
    for (const char* name : {"urban", "rural", "highway"}) {
        auto sc = scenario_by_name(name);
        for (int cls = 0; cls < kNumPrefClasses; ++cls)
            for (uint64_t seed = 0; seed < 40; ++seed) {
                auto s = generate_intent(static_cast<PrefClass>(cls), sc, seed);
                CHECK(s.cls == static_cast<PrefClass>(cls));
                CHECK(s.scenario == name);
                REQUIRE(s.tokens.size() == size_t(kMaxTokens));
                for (int id : s.tokens) REQUIRE(id != kUnkId);
            }
    }
}

TEST_CASE("intent generation is deterministic and varies with the seed") {
    auto sc = scenario_by_name("urban");
    auto a = generate_intent(PrefClass::LowBER, sc, 7);
    auto b = generate_intent(PrefClass::LowBER, sc, 7);
    CHECK(a.text == b.text);
    CHECK(a.tokens == b.tokens);
    CHECK(a.tokens == tokenize(a.text));
    std::set<std::string> texts;
    for (uint64_t s = 0; s < 24; ++s)
        texts.insert(generate_intent(PrefClass::LowBER, sc, s).text);
    CHECK(texts.size() > 1);
}

TEST_CASE("every class offers twelve phrasings") {
    for (int cls = 0; cls < kNumPrefClasses; ++cls)
        CHECK(template_count(static_cast<PrefClass>(cls)) == 12);
}

TEST_CASE("scenario descriptors are distinct and non-empty") {
    std::set<std::string> descs;
    for (const char* name : {"urban", "rural", "highway"}) {
        auto d = scenario_descriptor(name);
        CHECK_FALSE(d.empty());
        descs.insert(d);
    }
    CHECK(descs.size() == 3);
    CHECK(scenario_descriptor("swamp") == "the swamp environment");
}

TEST_CASE("class preference vectors match the canonical targets") {
    auto low = class_to_p(PrefClass::LowBER);
    CHECK(low.rel == doctest::Approx(0.8));
    CHECK(low.thr == doctest::Approx(0.1));
    CHECK(low.cmp == doctest::Approx(0.1));
    auto high = class_to_p(PrefClass::HighRate);
    CHECK(high.rel == doctest::Approx(0.1));
    CHECK(high.thr == doctest::Approx(0.8));
    CHECK(high.cmp == doctest::Approx(0.1));
    auto conv = class_to_p(PrefClass::Conventional);
    CHECK(conv.rel == doctest::Approx(1.0 / 3));
    CHECK(conv.thr == doctest::Approx(1.0 / 3));
    CHECK(conv.cmp == doctest::Approx(1.0 / 3));
}

TEST_CASE("corpus lines carry class, scenario, and text round-robin") {
    std::string corpus = corpus_text(18, 3);
    CHECK(corpus == corpus_text(18, 3));
    std::istringstream in(corpus);
    std::string line;
    int n = 0;
    int class_count[3] = {0, 0, 0};
    std::set<std::string> scenarios;
    while (std::getline(in, line)) {
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 + 1);
        REQUIRE(t1 != std::string::npos);
        REQUIRE(t2 != std::string::npos);
        const std::string cls = line.substr(0, t1);
        const std::string sc = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string text = line.substr(t2 + 1);
        class_count[int(pref_class_from_name(cls))]++;
        scenarios.insert(sc);
        CHECK_FALSE(text.empty());
        ++n;
    }
    CHECK(n == 18);
    CHECK(class_count[0] == 6);
    CHECK(class_count[1] == 6);
    CHECK(class_count[2] == 6);
    CHECK(scenarios.size() == 3);
}

}  // TEST_SUITE
