#include "linkforge/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>

#include "linkforge/errors.hpp"

namespace linkforge {

uint16_t crc16_ccitt(const Bits& bits) {
    uint16_t crc = 0xFFFF;
    for (uint8_t b : bits) {
        uint16_t top = static_cast<uint16_t>((crc >> 15) ^ (b & 1u));
        crc = static_cast<uint16_t>(crc << 1);
        if (top) crc ^= 0x1021;
    }
    return crc;
}

void append_crc16(Bits& bits) {
    uint16_t crc = crc16_ccitt(bits);
    for (int i = 15; i >= 0; --i) bits.push_back(static_cast<uint8_t>((crc >> i) & 1u));
}

bool check_crc16(const Bits& bits_with_crc) {
    if (bits_with_crc.size() < 16) return false;
    Bits info(bits_with_crc.begin(), bits_with_crc.end() - 16);
    uint16_t crc = crc16_ccitt(info);
    for (int i = 0; i < 16; ++i) {
        uint8_t want = static_cast<uint8_t>((crc >> (15 - i)) & 1u);
        if (bits_with_crc[info.size() + i] != want) return false;
    }
    return true;
}

namespace {

// Hamming(7,4) codeword layout: d1 d2 d3 d4 p1 p2 p3.
void hamming_encode_block(const uint8_t* d, uint8_t* out) {
    out[0] = d[0];
    out[1] = d[1];
    out[2] = d[2];
    out[3] = d[3];
    out[4] = d[0] ^ d[1] ^ d[3];
    out[5] = d[0] ^ d[2] ^ d[3];
    out[6] = d[1] ^ d[2] ^ d[3];
}

void hamming_decode_block(const uint8_t* c, uint8_t* out) {
    std::array<uint8_t, 7> w;
    std::copy(c, c + 7, w.begin());
    uint8_t s1 = w[4] ^ w[0] ^ w[1] ^ w[3];
    uint8_t s2 = w[5] ^ w[0] ^ w[2] ^ w[3];
    uint8_t s3 = w[6] ^ w[1] ^ w[2] ^ w[3];
    // Syndrome value -> flipped position in the layout above.
    static constexpr int kErrPos[8] = {-1, 4, 5, 0, 6, 1, 2, 3};
    int pos = kErrPos[s1 | (s2 << 1) | (s3 << 2)];
    if (pos >= 0) w[pos] ^= 1u;
    out[0] = w[0];
    out[1] = w[1];
    out[2] = w[2];
    out[3] = w[3];
}

// Rate-1/2 convolutional code, constraint length 7, generators 133/171 octal.
// The 7-bit window holds the newest input at bit 6.
constexpr unsigned kConvG0 = 0x5B;
constexpr unsigned kConvG1 = 0x79;
constexpr int kConvStates = 64;
constexpr int kConvTail = 6;

inline uint8_t conv_out(unsigned window, unsigned gen) {
    return static_cast<uint8_t>(std::popcount(window & gen) & 1u);
}

Bits conv_encode(const Bits& info) {
    Bits out;
    out.reserve(2 * (info.size() + kConvTail));
    unsigned state = 0;  // last six inputs, newest at bit 5
    auto push = [&](uint8_t b) {
        unsigned w = (static_cast<unsigned>(b) << 6) | state;
        out.push_back(conv_out(w, kConvG0));
        out.push_back(conv_out(w, kConvG1));
        state = w >> 1;
    };
    for (uint8_t b : info) push(b & 1u);
    for (int i = 0; i < kConvTail; ++i) push(0);
    return out;
}

Bits conv_decode(const Bits& coded) {
    if (coded.size() % 2 != 0 || coded.size() < 2 * kConvTail)
        throw FramingError("convolutional stream length invalid");
    size_t steps = coded.size() / 2;

    constexpr int kInf = 1 << 28;
    std::array<int, kConvStates> pm;
    pm.fill(kInf);
    pm[0] = 0;
    // Branch outputs depend only on (state, input); precompute once.
    static const auto kBranch = [] {
        std::array<std::array<uint8_t, 2>, kConvStates * 2> t{};
        for (int s = 0; s < kConvStates; ++s)
            for (int b = 0; b < 2; ++b) {
                unsigned w = (static_cast<unsigned>(b) << 6) | static_cast<unsigned>(s);
                t[s * 2 + b] = {conv_out(w, kConvG0), conv_out(w, kConvG1)};
            }
        return t;
    }();

    std::vector<uint8_t> from(steps * kConvStates);  // predecessor state + input bit
    std::array<int, kConvStates> next_pm;
    for (size_t t = 0; t < steps; ++t) {
        uint8_t r0 = coded[2 * t] & 1u;
        uint8_t r1 = coded[2 * t + 1] & 1u;
        next_pm.fill(kInf);
        for (int s = 0; s < kConvStates; ++s) {
            if (pm[s] >= kInf) continue;
            for (int b = 0; b < 2; ++b) {
                const auto& o = kBranch[s * 2 + b];
                int metric = pm[s] + (o[0] != r0) + (o[1] != r1);
                int ns = (b << 5) | (s >> 1);
                if (metric < next_pm[ns]) {
                    next_pm[ns] = metric;
                    from[t * kConvStates + ns] = static_cast<uint8_t>((s << 1) | b);
                }
            }
        }
        pm = next_pm;
    }

    Bits decoded(steps);
    int state = 0;  // termination drives the encoder back to zero
    for (size_t t = steps; t-- > 0;) {
        uint8_t f = from[t * kConvStates + state];
        decoded[t] = f & 1u;
        state = f >> 1;
    }
    decoded.resize(steps - kConvTail);
    return decoded;
}

}  // namespace

EncodeResult encode(const Bits& info, Coding coding) {
    EncodeResult res;
    switch (coding) {
        case Coding::Uncoded:
            res.coded = info;
            return res;
        case Coding::Rep3:
        case Coding::Rep5: {
            int k = coding == Coding::Rep3 ? 3 : 5;
            res.coded.reserve(info.size() * k);
            for (uint8_t b : info)
                for (int i = 0; i < k; ++i) res.coded.push_back(b & 1u);
            return res;
        }
        case Coding::Hamming74: {
            Bits padded = info;
            while (padded.size() % 4 != 0) {
                padded.push_back(0);
                ++res.pad_bits;
            }
            res.coded.resize(padded.size() / 4 * 7);
            for (size_t i = 0; i < padded.size() / 4; ++i)
                hamming_encode_block(padded.data() + 4 * i, res.coded.data() + 7 * i);
            return res;
        }
        case Coding::ConvR12:
            res.coded = conv_encode(info);
            return res;
    }
    throw ConfigError("unknown coding scheme");
}

Bits decode(const Bits& coded, Coding coding, int pad_bits) {
    Bits info;
    switch (coding) {
        case Coding::Uncoded:
            info = coded;
            break;
        case Coding::Rep3:
        case Coding::Rep5: {
            int k = coding == Coding::Rep3 ? 3 : 5;
            if (coded.size() % k != 0) throw FramingError("repetition stream length invalid");
            info.resize(coded.size() / k);
            for (size_t i = 0; i < info.size(); ++i) {
                int sum = 0;
                for (int j = 0; j < k; ++j) sum += coded[i * k + j] & 1u;
                info[i] = sum > k / 2 ? 1 : 0;
            }
            break;
        }
        case Coding::Hamming74: {
            if (coded.size() % 7 != 0) throw FramingError("hamming stream length invalid");
            info.resize(coded.size() / 7 * 4);
            for (size_t i = 0; i < coded.size() / 7; ++i)
                hamming_decode_block(coded.data() + 7 * i, info.data() + 4 * i);
            break;
        }
        case Coding::ConvR12:
            info = conv_decode(coded);
            break;
    }
    if (pad_bits < 0 || static_cast<size_t>(pad_bits) > info.size())
        throw FramingError("pad length exceeds decoded stream");
    info.resize(info.size() - pad_bits);
    return info;
}

int coded_block_bits(Coding coding, int info_bits_with_crc) {
    switch (coding) {
        case Coding::Uncoded: return 1;
        case Coding::Rep3: return 3;
        case Coding::Rep5: return 5;
        case Coding::Hamming74: return 7;
        case Coding::ConvR12: return conv_coded_length(info_bits_with_crc);
    }
    throw ConfigError("unknown coding scheme");
}

int conv_coded_length(int info_bits) { return 2 * (info_bits + kConvTail); }

}  // namespace linkforge
