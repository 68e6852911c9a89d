#include "linkforge/intent.hpp"

#include <array>
#include <cctype>
#include <map>
#include <sstream>

#include "linkforge/errors.hpp"
#include "linkforge/rng.hpp"

namespace linkforge {

namespace {

// {d} marks the scenario descriptor slot.
const std::array<std::vector<std::string>, kNumPrefClasses>& templates() {
    static const std::array<std::vector<std::string>, kNumPrefClasses> t = {{
        {
            "we need rock solid reliability on {d}",
            "keep the error rate as low as possible across {d}",
            "deliver every packet intact even in {d}",
            "bit errors are unacceptable for this link over {d}",
            "prioritize integrity of the data stream through {d}",
            "make the connection dependable while driving {d}",
            "minimize corrupted frames on {d}",
            "this control channel over {d} must stay error free",
            "favor robustness over speed for {d}",
            "i care most about clean reception in {d}",
            "push the residual error rate down over {d}",
            "safety messages across {d} need maximum reliability",
        },
        {
            "maximize throughput on {d}",
            "we want the fastest possible data rate across {d}",
            "stream as many bits as you can through {d}",
            "speed matters more than anything for {d}",
            "push the link to its peak rate over {d}",
            "large file transfers over {d} need high bandwidth",
            "give me raw speed while crossing {d}",
            "keep the downlink saturated on {d}",
            "favor data rate over robustness in {d}",
            "the video feed through {d} needs maximum capacity",
            "squeeze every bit per second out of {d}",
            "this bulk upload across {d} should finish quickly",
        },
        {
            "a balanced setup for {d} works fine",
            "no strong preference just sensible defaults on {d}",
            "standard operation across {d} please",
            "treat reliability speed and cost evenly over {d}",
            "pick a reasonable middle ground for {d}",
            "nothing special needed on {d} keep it typical",
            "an ordinary configuration through {d} is enough",
            "balance all objectives while on {d}",
            "default behaviour suits this {d} deployment",
            "use a general purpose profile for {d}",
            "an even compromise across {d} is acceptable",
            "plain everyday service over {d} will do",
        },
    }};
    return t;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

struct Vocab {
    std::vector<std::string> words;  // index = token id
    std::map<std::string, int> ids;

    void add(const std::string& w) {
        if (ids.count(w)) return;
        ids[w] = static_cast<int>(words.size());
        words.push_back(w);
    }
};

const Vocab& vocab() {
    static const Vocab v = [] {
        Vocab b;
        b.add("<pad>");
        b.add("<unk>");
        for (const auto& cls : templates())
            for (const auto& tpl : cls)
                for (const auto& w : split_words(tpl))
                    if (w != "d") b.add(w);
        for (const auto& sc : builtin_scenarios())
            for (const auto& w : split_words(scenario_descriptor(sc.name))) b.add(w);
        for (const auto& w : split_words("the environment")) b.add(w);
        return b;
    }();
    return v;
}

}  // namespace

std::string scenario_descriptor(const std::string& scenario_name) {
    if (scenario_name == "urban") return "the dense urban grid";
    if (scenario_name == "rural") return "the open rural plain";
    if (scenario_name == "highway") return "the busy highway stretch";
    return "the " + scenario_name + " environment";
}

int template_count(PrefClass cls) {
    return static_cast<int>(templates()[static_cast<int>(cls)].size());
}

std::vector<int> tokenize(const std::string& text) {
    const Vocab& v = vocab();
    std::vector<int> ids;
    ids.reserve(kMaxTokens);
    for (const auto& w : split_words(text)) {
        if (static_cast<int>(ids.size()) == kMaxTokens) break;
        auto it = v.ids.find(w);
        ids.push_back(it == v.ids.end() ? kUnkId : it->second);
    }
    ids.resize(kMaxTokens, kPadId);
    return ids;
}

const std::vector<std::string>& vocabulary() { return vocab().words; }

IntentSample generate_intent(PrefClass cls, const Scenario& sc, uint64_t seed) {
    const auto& pool = templates()[static_cast<int>(cls)];
    Rng rng(mix_seed(fnv1a(sc.name.data(), sc.name.size()),
                     static_cast<uint64_t>(cls), seed));
    const std::string& tpl = pool[rng.uniform_int(pool.size())];

    IntentSample s;
    s.cls = cls;
    s.scenario = sc.name;
    std::string desc = scenario_descriptor(sc.name);
    size_t slot = tpl.find("{d}");
    s.text = tpl.substr(0, slot) + desc + tpl.substr(slot + 3);
    s.tokens = tokenize(s.text);
    return s;
}

PreferenceVector class_to_p(PrefClass cls) { return canonical_preference(cls); }

std::string corpus_text(int samples, uint64_t seed) {
    if (samples < 0) throw ConfigError("corpus sample count must be non-negative");
    const auto& scs = builtin_scenarios();
    std::ostringstream out;
    for (int i = 0; i < samples; ++i) {
        PrefClass cls = static_cast<PrefClass>(i % kNumPrefClasses);
        const Scenario& sc = scs[(i / kNumPrefClasses) % scs.size()];
        IntentSample s = generate_intent(cls, sc, mix_seed(seed, i));
        out << pref_class_name(cls) << '\t' << sc.name << '\t' << s.text << '\n';
    }
    return out.str();
}

}  // namespace linkforge
