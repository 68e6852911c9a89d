#include "linkforge/phy.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "linkforge/errors.hpp"
#include "linkforge/modem.hpp"

namespace linkforge {

namespace {

using cd = std::complex<double>;

// Allocated subcarriers split into a pilot comb (every 8th, LSPilot only) and
// data carriers, both ascending.
struct CellLayout {
    std::vector<int> pilot_sc;
    std::vector<int> data_sc;
};

CellLayout make_layout(const LinkConfig& cfg) {
    CellLayout lay;
    bool pilots = cfg.estimation == Estimation::LSPilot;
    for (int s = 0; s < cfg.allocation; ++s) {
        if (pilots && s % 8 == 0)
            lay.pilot_sc.push_back(s);
        else
            lay.data_sc.push_back(s);
    }
    return lay;
}

// Pilot LS estimates sit at multiples of 8; linear between neighbours, held
// flat past the last pilot.
cd interp_pilots(const std::vector<int>& ps, const std::vector<cd>& hp, int s) {
    if (s >= ps.back()) return hp.back();
    size_t i = static_cast<size_t>(s / 8);
    double frac = static_cast<double>(s - ps[i]) / static_cast<double>(ps[i + 1] - ps[i]);
    return hp[i] + (hp[i + 1] - hp[i]) * frac;
}

// Combined equalize + decision-scaling coefficient. ZF divides by the
// estimate; MMSE applies conj(h)/(|h|^2+nv) and the slicer then removes the
// |h|^2/(|h|^2+nv) shrinkage so amplitude decisions stay unbiased. Both also
// undo the transmit power scaling.
cd slicer_coeff(cd h, double nv, Equalization eq, double sqrt_p) {
    double h2 = std::norm(h);
    if (eq == Equalization::ZF) return std::conj(h) / (sqrt_p * (h2 + 1e-30));
    cd w = std::conj(h) / (h2 + nv);
    double bias = h2 / (h2 + nv);
    return w / (sqrt_p * (bias > 1e-30 ? bias : 1e-30));
}

}  // namespace

Payload random_payload(int length, uint64_t seed) {
    if (length <= 0 || length % 8 != 0)
        throw ConfigError("payload length must be positive and divisible by 8");
    Payload p;
    p.bits.resize(static_cast<size_t>(length));
    Rng rng(mix_seed(seed, 0x7061796cULL));
    for (int i = 0; i < length; i += 8) {
        uint64_t w = rng.next_u64();
        for (int j = 0; j < 8; ++j) p.bits[i + j] = static_cast<uint8_t>((w >> j) & 1u);
    }
    return p;
}

bool config_feasible(const LinkConfig& config, int payload_bits) {
    int info_bits = payload_bits + 16;
    long long block_bits = coded_block_bits(config.coding, info_bits);
    int m = bits_per_symbol(config.modulation);
    long long block_symbols = (block_bits * config.spreading + m - 1) / m;
    long long data_cells =
        static_cast<long long>(config.allocation - pilot_subcarriers(config)) * kGridTime;
    return block_symbols <= data_cells;
}

SimResult simulate_link(const LinkConfig& config, const ChannelRealization& ch,
                        const Payload& payload, uint64_t seed) {
    const int len = static_cast<int>(payload.bits.size());
    if (len <= 0 || len % 8 != 0)
        throw ConfigError("payload length must be positive and divisible by 8");

    SimResult res;
    res.metrics.complexity = complexity_cost(config);
    if (!config_feasible(config, len)) {
        res.status = SimStatus::Infeasible;
        res.metrics.ber = 0.5;
        return res;
    }

    Bits info = payload.bits;
    append_crc16(info);
    EncodeResult enc = encode(info, config.coding);

    const int sf = config.spreading;
    const int m = bits_per_symbol(config.modulation);
    const size_t nchips = enc.coded.size() * static_cast<size_t>(sf);
    const size_t nsym = (nchips + m - 1) / m;
    const double sqrt_p = std::sqrt(config.power);

    std::vector<cd> tx(nsym);
    {
        std::array<uint8_t, 8> bb{};
        for (size_t k = 0; k < nsym; ++k) {
            for (int j = 0; j < m; ++j) {
                size_t chip = k * m + j;
                bb[j] = chip < nchips ? enc.coded[chip / sf] : 0;
            }
            tx[k] = modulate_symbol(bb.data(), config.modulation) * sqrt_p;
        }
    }

    const CellLayout lay = make_layout(config);
    const size_t ndata = lay.data_sc.size();
    const size_t npil = lay.pilot_sc.size();
    const double nv = ch.noise_variance;
    const double sigma_c = std::sqrt(0.5 * nv);
    const bool perfect = config.estimation == Estimation::Perfect;

    std::vector<cd> coeff_perfect;
    if (perfect) {
        coeff_perfect.resize(static_cast<size_t>(kGridTime) * ndata);
        for (int t = 0; t < kGridTime; ++t)
            for (size_t di = 0; di < ndata; ++di)
                coeff_perfect[t * ndata + di] =
                    slicer_coeff(ch.gain(t, lay.data_sc[di]), nv, config.equalization, sqrt_p);
    }

    const int max_attempts =
        config.harq == Harq::Off ? 1 : config.harq == Harq::Chase1 ? 2 : 3;
    Rng noise(mix_seed(seed, 0x6c696e6bULL));

    std::vector<cd> u_sum(nsym, cd(0.0, 0.0));
    std::vector<cd> hp(npil);
    std::vector<cd> coeff_ls(ndata);
    Bits chips(nsym * static_cast<size_t>(m));
    Bits coded_hat(enc.coded.size());
    Bits info_hat;
    bool success = false;
    int used = 0;

    for (int a = 1; a <= max_attempts && !success; ++a) {
        used = a;
        // Payloads longer than one grid wrap onto further frames drawn from
        // the same realization; pilots are re-estimated every symbol period.
        size_t idx = 0;
        while (idx < nsym) {
            for (int t = 0; t < kGridTime && idx < nsym; ++t) {
                const cd* crow;
                if (perfect) {
                    crow = coeff_perfect.data() + static_cast<size_t>(t) * ndata;
                } else {
                    for (size_t pi = 0; pi < npil; ++pi) {
                        double nr, ni;
                        noise.gauss_pair(nr, ni, sigma_c);
                        cd y = ch.gain(t, lay.pilot_sc[pi]) * sqrt_p + cd(nr, ni);
                        hp[pi] = y / sqrt_p;
                    }
                    for (size_t di = 0; di < ndata; ++di)
                        coeff_ls[di] =
                            slicer_coeff(interp_pilots(lay.pilot_sc, hp, lay.data_sc[di]), nv,
                                         config.equalization, sqrt_p);
                    crow = coeff_ls.data();
                }
                for (size_t di = 0; di < ndata && idx < nsym; ++di, ++idx) {
                    double nr, ni;
                    noise.gauss_pair(nr, ni, sigma_c);
                    cd y = ch.gain(t, lay.data_sc[di]) * tx[idx] + cd(nr, ni);
                    u_sum[idx] += y * crow[di];
                }
            }
        }

        const double inv_a = 1.0 / a;
        for (size_t k = 0; k < nsym; ++k)
            demodulate_symbol(u_sum[k] * inv_a, config.modulation, chips.data() + k * m);
        for (size_t i = 0; i < coded_hat.size(); ++i) {
            int sum = 0;
            for (int j = 0; j < sf; ++j) sum += chips[i * sf + j];
            coded_hat[i] = sum * 2 > sf ? 1 : 0;
        }
        info_hat = decode(coded_hat, config.coding, enc.pad_bits);
        success = check_crc16(info_hat);
    }

    int errs = 0;
    for (int i = 0; i < len; ++i) errs += info_hat[i] != payload.bits[i];
    res.metrics.ber = static_cast<double>(errs) / len;
    res.metrics.goodput = success ? nominal_rate(config) / used : 0.0;
    res.metrics.avg_transmissions = used;
    return res;
}

}  // namespace linkforge
