#include "pirsim/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pirsim/fft.hpp"
#include "pirsim/util.hpp"

namespace pirsim::features {

namespace {

std::vector<double> mean_removed(const std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean;
    return out;
}

double energy_of(const std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    return e;
}

}  // namespace

std::array<double, 8> energy_features(const scene::Event& ev) {
    std::array<double, 8> e{};
    for (int c = 0; c < 8; ++c)
        e[static_cast<size_t>(c)] = energy_of(mean_removed(ev.channels[static_cast<size_t>(c)]));
    return e;
}

RhoMax rho_max(const scene::Event& ev) {
    const auto l1 = mean_removed(ev.channels[4]);
    const auto l2 = mean_removed(ev.channels[5]);
    const auto r1 = mean_removed(ev.channels[6]);
    const auto r2 = mean_removed(ev.channels[7]);
    const double el = energy_of(l1) + energy_of(l2);
    const double er = energy_of(r1) + energy_of(r2);
    if (el <= 0.0 || er <= 0.0) throw std::domain_error("rho_max: silent channel pair");

    // corr(k) = sum_n sum_i L_i(n) R_i(n+k); positive argmax when R lags L.
    auto c1 = cross_correlation(l1, r1);
    auto c2 = cross_correlation(l2, r2);
    const int n = static_cast<int>(l1.size());
    const double scale = 1.0 / std::sqrt(el * er);
    RhoMax best{-2.0, 0};
    for (int idx = 0; idx < 2 * n - 1; ++idx) {
        double rho = (c1[static_cast<size_t>(idx)] + c2[static_cast<size_t>(idx)]) * scale;
        if (rho > best.value) {
            best.value = rho;
            best.lag = idx - (n - 1);
        }
    }
    return best;
}

std::array<double, 60> c60_features(const scene::Event& ev,
                                    const chirplet::DecomposeOptions& opts,
                                    std::vector<std::string>* flags) {
    std::array<double, 60> out{};
    for (int c = 0; c < 4; ++c) {
        const auto s = mean_removed(ev.channels[static_cast<size_t>(c)]);
        chirplet::Decomposition dec;
        try {
            dec = chirplet::decompose(chirplet::analytic_signal(s), opts);
        } catch (const std::domain_error&) {
            if (flags)
                flags->push_back(std::string("c60_zero_") +
                                 optics::kChannelOrder[static_cast<size_t>(c)]);
            continue;  // zero block for an empty channel
        }
        for (int k = 0; k < opts.q && k < static_cast<int>(dec.chirplets.size()); ++k) {
            const chirplet::Chirplet& ch = dec.chirplets[static_cast<size_t>(k)];
            size_t base = static_cast<size_t>(c * 15 + k * 5);
            out[base + 0] = ch.amplitude;
            out[base + 1] = ch.center;
            out[base + 2] = ch.frequency;
            out[base + 3] = ch.chirp_rate;
            out[base + 4] = ch.duration;
        }
    }
    return out;
}

const char* to_string(Inference inf) {
    switch (inf) {
        case Inference::short_animal_5m: return "short animal at 5 m";
        case Inference::animal_10m: return "animal at 10 m";
        case Inference::tall_animal_5m: return "tall animal at 5 m";
        case Inference::human_10m: return "human at 10 m";
        case Inference::short_human_5m: return "short human at 5 m";
        case Inference::human_5m: return "human at 5 m";
        case Inference::clutter_unlikely: return "clutter or else, combination unlikely";
    }
    return "?";
}

Inference truth_table_inference(const std::array<double, 4>& e_abcd,
                                const std::array<double, 4>& thresholds) {
    int pattern = 0;
    for (int i = 0; i < 4; ++i) {
        if (thresholds[static_cast<size_t>(i)] <= 0.0)
            throw std::domain_error("truth_table_inference: thresholds must be > 0");
        pattern = (pattern << 1) |
                  (e_abcd[static_cast<size_t>(i)] > thresholds[static_cast<size_t>(i)] ? 1 : 0);
    }
    switch (pattern) {  // bits are A,B,C,D
        case 0b0001: return Inference::short_animal_5m;
        case 0b0010: return Inference::animal_10m;
        case 0b0011: return Inference::tall_animal_5m;
        case 0b0110: return Inference::human_10m;
        case 0b0111: return Inference::short_human_5m;
        case 0b1111: return Inference::human_5m;
        default: return Inference::clutter_unlikely;
    }
}

std::array<double, 4> calibrate_thresholds(const AppConfig& cfg, uint64_t seed, int runs) {
    std::array<double, 4> acc{};
    for (int i = 0; i < runs; ++i) {
        scene::SceneSpec spec;
        spec.tower = cfg.tower;
        spec.radiometry = cfg.radiometry;
        spec.response = cfg.response;
        spec.grid_resolution_per_m = cfg.gen.grid_resolution_per_m;
        spec.agc_target_fraction = cfg.gen.agc_target_fraction;
        spec.agc_max_gain = cfg.gen.agc_max_gain;
        spec.seed = derive_seed(seed, 0x1d1e00000000ull + static_cast<uint64_t>(i));
        scene::Event ev = scene::simulate_event(spec);
        auto e = energy_features(ev);
        for (int c = 0; c < 4; ++c) acc[static_cast<size_t>(c)] += e[static_cast<size_t>(c)];
    }
    for (auto& v : acc) v = 5.0 * v / runs;
    return acc;
}

FeatureVector extract_features(const scene::Event& ev, const chirplet::DecomposeOptions& opts) {
    FeatureVector f;
    f.label = ev.meta.label;
    f.flags = ev.meta.flags;
    f.e8 = energy_features(ev);
    RhoMax rho = rho_max(ev);
    f.rho_max = rho.value;
    f.rho_lag = rho.lag;
    f.c60 = c60_features(ev, opts, &f.flags);
    return f;
}

}  // namespace pirsim::features
