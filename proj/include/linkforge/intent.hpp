#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkforge/channel.hpp"
#include "linkforge/reward.hpp"

namespace linkforge {

constexpr int kMaxTokens = 32;
constexpr int kVocabSize = 256;
constexpr int kPadId = 0;
constexpr int kUnkId = 1;

struct IntentSample {
    std::string text;
    PrefClass cls = PrefClass::Conventional;
    std::string scenario;
    std::vector<int> tokens;  // always kMaxTokens long, PAD-filled
};

// One of twelve phrasings per class with the scenario descriptor spliced in.
// Deterministic in (class, scenario, seed).
IntentSample generate_intent(PrefClass cls, const Scenario& sc, uint64_t seed);

// Lowercase, split on anything non-alphanumeric, map through the fixed
// vocabulary, pad or truncate to kMaxTokens.
std::vector<int> tokenize(const std::string& text);

// PAD, UNK, then every template and descriptor word in first-appearance order.
const std::vector<std::string>& vocabulary();

std::string scenario_descriptor(const std::string& scenario_name);

int template_count(PrefClass cls);

PreferenceVector class_to_p(PrefClass cls);

// Line-delimited class<TAB>scenario<TAB>text, classes and built-in scenarios
// interleaved round-robin so every prefix is near-balanced.
std::string corpus_text(int samples, uint64_t seed);

}  // namespace linkforge
