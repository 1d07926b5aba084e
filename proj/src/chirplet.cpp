#include "pirsim/chirplet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "pirsim/fft.hpp"

namespace pirsim::chirplet {

namespace {

using cd = std::complex<double>;

constexpr int kDftSize = 128;  // fixed by the omega grid k*pi/64, k=0..64

double energy(std::span<const cd> v) {
    double e = 0.0;
    for (const cd& x : v) e += std::norm(x);
    return e;
}

}  // namespace

std::vector<cd> analytic_signal(std::span<const double> s) {
    if (s.size() < 8) throw std::invalid_argument("analytic_signal: need at least 8 samples");
    std::vector<cd> a(s.begin(), s.end());
    if (a.size() % 2 != 0) a.emplace_back(0.0, 0.0);  // pad odd input by one zero
    const size_t n = a.size();
    fft(a);
    // keep DC and Nyquist, double positive frequencies, zero negatives
    for (size_t k = 1; k < n / 2; ++k) a[k] *= 2.0;
    for (size_t k = n / 2 + 1; k < n; ++k) a[k] = 0.0;
    fft(a, true);
    // the real part is the input by construction; enforce it exactly
    for (size_t i = 0; i < n; ++i)
        a[i] = cd(i < s.size() ? s[i] : 0.0, a[i].imag());
    return a;
}

std::complex<double> atom_value(double m, double omega, double c, double d, double n) {
    const double u = n - m;
    const double g = u / (2.0 * d);
    const double env = std::pow(2.0 * M_PI * d * d, -0.25) * std::exp(-g * g);
    const double ph = omega * u + 0.5 * c * u * u;
    return {env * std::cos(ph), env * std::sin(ph)};
}

std::vector<cd> make_atom(double m, double omega, double c, double d, int n_samples) {
    std::vector<cd> x(static_cast<size_t>(n_samples));
    for (int n = 0; n < n_samples; ++n)
        x[static_cast<size_t>(n)] = atom_value(m, omega, c, d, n);
    return x;
}

namespace {

// Support window of an atom clipped to the signal: |n - m| <= span*d.
struct Window {
    int lo, hi;  // inclusive sample range; empty when lo > hi
};

Window atom_window(double m, double d, int n, double span) {
    int lo = static_cast<int>(std::floor(m - span * d)) - 1;
    int hi = static_cast<int>(std::ceil(m + span * d)) + 1;
    return {std::max(lo, 0), std::min(hi, n - 1)};
}

// Projection of the residual onto the raw atom over its window.
struct AtomFit {
    cd coefficient;    // multiplies the raw Eq-style atom
    double atom_norm2; // ||x||^2 over the window
    double gain2;      // |<r,x>|^2 / ||x||^2, the energy removed
};

AtomFit fit_atom(std::span<const cd> r, double m, double omega, double c, double d, double span) {
    AtomFit fit{};
    Window w = atom_window(m, d, static_cast<int>(r.size()), span);
    const double norm_const = std::pow(2.0 * M_PI * d * d, -0.25);
    const double inv2d = 1.0 / (2.0 * d);
    double dot_re = 0.0, dot_im = 0.0, n2 = 0.0;
    for (int n = w.lo; n <= w.hi; ++n) {
        const double u = n - m;
        const double g = u * inv2d;
        const double env = norm_const * std::exp(-g * g);
        const double ph = omega * u + 0.5 * c * u * u;
        const double xr = env * std::cos(ph);
        const double xi = env * std::sin(ph);
        const cd& rv = r[static_cast<size_t>(n)];
        dot_re += rv.real() * xr + rv.imag() * xi;
        dot_im += rv.imag() * xr - rv.real() * xi;
        n2 += env * env;
    }
    if (n2 <= 0.0) return fit;
    cd dot(dot_re, dot_im);
    fit.coefficient = dot / n2;
    fit.atom_norm2 = n2;
    fit.gain2 = std::norm(dot) / n2;
    return fit;
}

struct CoarsePick {
    double m = 0, omega = 0, c = 0, d = 0;
    double score = -1.0;  // |<r,x>|^2 / ||x||^2
};

// Allocation-free 128-point DFT with static twiddle/bit-reversal tables;
// the coarse scan runs thousands of these per decomposition step.
void fft128(std::array<cd, kDftSize>& a) {
    struct Tables {
        std::array<int, kDftSize> rev;
        std::array<cd, kDftSize> tw;  // exp(-j 2 pi k / 128)
        Tables() {
            for (int i = 0; i < kDftSize; ++i) {
                int r = 0;
                for (int b = 0; b < 7; ++b)
                    if (i & (1 << b)) r |= 1 << (6 - b);
                rev[static_cast<size_t>(i)] = r;
                double ang = -2.0 * M_PI * i / kDftSize;
                tw[static_cast<size_t>(i)] = cd(std::cos(ang), std::sin(ang));
            }
        }
    };
    static const Tables t;
    for (int i = 0; i < kDftSize; ++i) {
        int j = t.rev[static_cast<size_t>(i)];
        if (i < j) std::swap(a[static_cast<size_t>(i)], a[static_cast<size_t>(j)]);
    }
    for (int len = 2; len <= kDftSize; len <<= 1) {
        const int stride = kDftSize / len;
        for (int i = 0; i < kDftSize; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                cd w = t.tw[static_cast<size_t>(j * stride)];
                cd u = a[static_cast<size_t>(i + j)];
                cd v = a[static_cast<size_t>(i + j + len / 2)] * w;
                a[static_cast<size_t>(i + j)] = u + v;
                a[static_cast<size_t>(i + j + len / 2)] = u - v;
            }
        }
    }
}

// Cached-twiddle forward DFT for the scan's power-of-two sizes (256..4096).
void fft_cached(std::vector<cd>& a) {
    struct Tables {
        std::vector<cd> tw[13];  // tw[log2(n)][k] = exp(-j 2 pi k / n)
        Tables() {
            for (int lg = 8; lg <= 12; ++lg) {
                int n = 1 << lg;
                tw[lg].resize(static_cast<size_t>(n / 2));
                for (int k = 0; k < n / 2; ++k) {
                    double ang = -2.0 * M_PI * k / n;
                    tw[lg][static_cast<size_t>(k)] = cd(std::cos(ang), std::sin(ang));
                }
            }
        }
    };
    static const Tables t;
    const int n = static_cast<int>(a.size());
    int lg = 0;
    while ((1 << lg) < n) ++lg;
    if ((1 << lg) != n || lg < 8 || lg > 12) {
        fft(a);
        return;
    }
    const auto& tw = t.tw[lg];
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[static_cast<size_t>(i)], a[static_cast<size_t>(j)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                cd w = tw[static_cast<size_t>(j * stride)];
                cd u = a[static_cast<size_t>(i + j)];
                cd v = a[static_cast<size_t>(i + j + len / 2)] * w;
                a[static_cast<size_t>(i + j)] = u + v;
                a[static_cast<size_t>(i + j + len / 2)] = u - v;
            }
        }
    }
}

// An atom of duration d has frequency bandwidth ~1/d, so scans of long
// atoms need a finer omega grid than the 128-bin base or the best match
// slips between gridpoints; the DFT size grows with d (the base grid stays
// a subset). Long atoms also shift slowly, so their m grid is coarser.
int scan_dft_size(double d) {
    int size = kDftSize;
    while (size < 5.3 * d && size < 4096) size <<= 1;
    return size;
}

int scan_m_step(int base_step, double d) {
    int step = std::max(1, base_step);
    return std::max(step, (static_cast<int>(d) / 2 / step) * step);
}

// Full dictionary scan. For fixed (c,d,m) the correlations over every omega
// gridpoint are one DFT of the chirped-windowed residual slice folded
// modulo the DFT size, so one FFT covers all frequencies at once.
CoarsePick coarse_scan(std::span<const cd> r, const DictionaryParams& dict) {
    const int n = static_cast<int>(r.size());
    CoarsePick best;
    std::vector<cd> table;      // env(u) * exp(-j c u^2 / 2)
    std::vector<double> env2;   // env(u)^2 prefix sums
    std::array<cd, kDftSize> folded128;
    std::vector<cd> folded;

    // |r|^2 prefix sums: Cauchy-Schwarz bound for pruning hopeless windows.
    std::vector<double> r2(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
        r2[static_cast<size_t>(i) + 1] = r2[static_cast<size_t>(i)] + std::norm(r[static_cast<size_t>(i)]);

    auto consider = [&](double m, double omega, double c, double d, double score) {
        double eps = 1e-12 * std::max(score, best.score);
        if (score > best.score + eps) {
            best = {m, omega, c, d, score};
        } else if (score >= best.score - eps) {
            // ties break toward smaller m, then omega, then the gentlest
            // chirp and shortest duration
            if (m < best.m ||
                (m == best.m &&
                 (omega < best.omega ||
                  (omega == best.omega &&
                   (std::abs(c) < std::abs(best.c) || (c == best.c && d < best.d)))))) {
                best = {m, omega, c, d, std::max(score, best.score)};
            }
        }
    };

    for (double d : dict.durations) {
        const int half = static_cast<int>(std::ceil(4.0 * d));
        const int width = 2 * half + 1;
        const int m_step = scan_m_step(dict.m_step, d);
        const int size = scan_dft_size(d);
        folded.assign(static_cast<size_t>(size), cd(0.0, 0.0));
        env2.assign(static_cast<size_t>(width) + 1, 0.0);
        std::vector<double> env(static_cast<size_t>(width));
        const double norm_const = std::pow(2.0 * M_PI * d * d, -0.25);
        for (int i = 0; i < width; ++i) {
            double u = i - half;
            double g = u / (2.0 * d);
            env[static_cast<size_t>(i)] = norm_const * std::exp(-g * g);
            env2[static_cast<size_t>(i) + 1] =
                env2[static_cast<size_t>(i)] + env[static_cast<size_t>(i)] * env[static_cast<size_t>(i)];
        }
        for (double c : dict.chirp_rates) {
            table.resize(static_cast<size_t>(width));
            for (int i = 0; i < width; ++i) {
                double u = i - half;
                double ph = -0.5 * c * u * u;
                table[static_cast<size_t>(i)] = env[static_cast<size_t>(i)] *
                                                cd(std::cos(ph), std::sin(ph));
            }
            for (int m = 0; m < n; m += m_step) {
                const int ulo = std::max(-half, -m);
                const int uhi = std::min(half, n - 1 - m);
                if (ulo > uhi) continue;
                double norm2 = env2[static_cast<size_t>(uhi + half) + 1] -
                               env2[static_cast<size_t>(ulo + half)];
                if (norm2 <= 1e-300) continue;
                // score <= residual energy inside the window
                if (r2[static_cast<size_t>(m + uhi) + 1] - r2[static_cast<size_t>(m + ulo)] <=
                    best.score)
                    continue;
                if (size == kDftSize) {
                    folded128.fill(cd(0.0, 0.0));
                    for (int u = ulo; u <= uhi; ++u) {
                        int bin = ((u % size) + size) % size;
                        folded128[static_cast<size_t>(bin)] +=
                            r[static_cast<size_t>(m + u)] * table[static_cast<size_t>(u + half)];
                    }
                    fft128(folded128);
                    for (int k = 0; k <= size / 2; ++k)
                        consider(m, 2.0 * M_PI * k / size, c, d,
                                 std::norm(folded128[static_cast<size_t>(k)]) / norm2);
                } else {
                    std::fill(folded.begin(), folded.end(), cd(0.0, 0.0));
                    for (int u = ulo; u <= uhi; ++u) {
                        int bin = ((u % size) + size) % size;
                        folded[static_cast<size_t>(bin)] +=
                            r[static_cast<size_t>(m + u)] * table[static_cast<size_t>(u + half)];
                    }
                    fft_cached(folded);
                    for (int k = 0; k <= size / 2; ++k)
                        consider(m, 2.0 * M_PI * k / size, c, d,
                                 std::norm(folded[static_cast<size_t>(k)]) / norm2);
                }
            }
        }
    }
    return best;
}

constexpr double kRefineSpan = 5.0;
constexpr int kGoldenIters = 14;

double objective(std::span<const cd> r, double m, double omega, double c, double d) {
    if (d < 2.0) return -1.0;
    return fit_atom(r, m, omega, c, d, kRefineSpan).gain2;
}

// Golden-section maximization over [lo, hi]; returns the best point seen
// including the endpoints and the incumbent.
template <typename F>
void golden_section(F f, double lo, double hi, int iters, double& best_x, double& best_f) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    auto consider = [&](double x, double v) {
        if (v > best_f) {
            best_f = v;
            best_x = x;
        }
    };
    consider(x1, f1);
    consider(x2, f2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
            consider(x2, f2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
            consider(x1, f1);
        }
    }
}

CoarsePick refine(std::span<const cd> r, const CoarsePick& start, const DecomposeOptions& opts) {
    const int n = static_cast<int>(r.size());
    double m = start.m, omega = start.omega, c = start.c, d = start.d;
    double best = objective(r, m, omega, c, d);

    for (int pass = 0; pass < opts.refine_max_passes; ++pass) {
        double before = best;
        double m_step = scan_m_step(opts.dict.m_step, d);
        double omega_halfgrid = 2.0 * M_PI / scan_dft_size(d);
        golden_section([&](double x) { return objective(r, x, omega, c, d); },
                       std::max(0.0, m - m_step), std::min<double>(n - 1, m + m_step),
                       kGoldenIters, m, best);
        golden_section([&](double x) { return objective(r, m, x, c, d); },
                       std::max(0.0, omega - omega_halfgrid), std::min(M_PI, omega + omega_halfgrid),
                       kGoldenIters, omega, best);
        double c_step = std::max(4.0 * std::pow(2.0, -18.0), 0.75 * std::abs(c));
        golden_section([&](double x) { return objective(r, m, omega, x, d); },
                       std::max(-0.02, c - c_step), std::min(0.02, c + c_step), kGoldenIters, c, best);
        golden_section([&](double x) { return objective(r, m, omega, c, x); },
                       std::max(2.0, d / 1.7), d * 1.7, kGoldenIters, d, best);
        if (best <= before * (1.0 + opts.refine_rel_tol)) break;
    }
    return {m, omega, c, d, best};
}

}  // namespace

Decomposition decompose(std::span<const cd> analytic, const DecomposeOptions& opts_in) {
    DecomposeOptions opts = opts_in;
    if (opts.dict.chirp_rates.empty()) {
        opts.dict.chirp_rates.push_back(0.0);
        for (int k = 0; k < 6; ++k) {
            double c = std::pow(2.0, k - 18);
            opts.dict.chirp_rates.push_back(c);
            opts.dict.chirp_rates.push_back(-c);
        }
        std::sort(opts.dict.chirp_rates.begin(), opts.dict.chirp_rates.end());
    }
    if (opts.dict.durations.empty()) opts.dict.durations = {8, 16, 32, 64, 128, 256};

    const int n = static_cast<int>(analytic.size());
    if (opts.q < 1) throw std::invalid_argument("decompose: q must be >= 1");
    if (opts.q > n / 4) throw std::invalid_argument("decompose: q exceeds N/4");
    const double e0 = energy(analytic);
    if (e0 <= 0.0) throw std::domain_error("decompose: empty signal");

    std::vector<cd> residual(analytic.begin(), analytic.end());
    Decomposition dec;
    double e_res = e0;

    for (int step = 0; step < opts.q; ++step) {
        if (e_res <= 1e-300 * e0) break;
        CoarsePick pick = coarse_scan(residual, opts.dict);
        if (pick.score <= 0.0) break;
        if (opts.refine_max_passes > 0) {
            CoarsePick refined = refine(residual, pick, opts);
            if (refined.score >= pick.score) pick = refined;
        }
        AtomFit fit = fit_atom(residual, pick.m, pick.omega, pick.c, pick.d, 8.0);
        if (fit.atom_norm2 <= 0.0 || std::abs(fit.coefficient) == 0.0) break;

        Chirplet ch;
        ch.amplitude = std::abs(fit.coefficient);
        ch.phase = std::arg(fit.coefficient);
        if (ch.phase >= M_PI) ch.phase -= 2.0 * M_PI;
        ch.center = pick.m;
        ch.frequency = pick.omega;
        ch.chirp_rate = pick.c;
        ch.duration = pick.d;
        dec.chirplets.push_back(ch);
        dec.step_correlations.push_back(std::sqrt(fit.gain2 / e_res));

        Window w = atom_window(pick.m, pick.d, n, 8.0);
        for (int i = w.lo; i <= w.hi; ++i)
            residual[static_cast<size_t>(i)] -=
                fit.coefficient * atom_value(pick.m, pick.omega, pick.c, pick.d, i);
        e_res = energy(residual);
    }
    dec.residual_energy = std::clamp(e_res / e0, 0.0, 1.0);
    return dec;
}

std::vector<cd> reconstruct(const Decomposition& dec, int n_samples) {
    std::vector<cd> out(static_cast<size_t>(n_samples), cd(0.0, 0.0));
    for (const Chirplet& ch : dec.chirplets) {
        cd coef = std::polar(ch.amplitude, ch.phase);
        Window w = atom_window(ch.center, ch.duration, n_samples, 8.0);
        for (int i = w.lo; i <= w.hi; ++i)
            out[static_cast<size_t>(i)] +=
                coef * atom_value(ch.center, ch.frequency, ch.chirp_rate, ch.duration, i);
    }
    return out;
}

double reconstruction_snr_db(std::span<const cd> signal, std::span<const cd> approx) {
    if (signal.size() != approx.size())
        throw std::invalid_argument("reconstruction_snr_db: length mismatch");
    double es = 0.0, ee = 0.0;
    for (size_t i = 0; i < signal.size(); ++i) {
        es += std::norm(signal[i]);
        ee += std::norm(signal[i] - approx[i]);
    }
    if (ee <= 0.0) return 300.0;
    return 10.0 * std::log10(es / ee);
}

std::string decomposition_json(const Decomposition& dec) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < dec.chirplets.size(); ++i) {
        const Chirplet& ch = dec.chirplets[i];
        arr.push_back({{"a", ch.amplitude},
                       {"phi", ch.phase},
                       {"m", ch.center},
                       {"omega", ch.frequency},
                       {"c", ch.chirp_rate},
                       {"d", ch.duration},
                       {"step_correlation", dec.step_correlations[i]}});
    }
    nlohmann::json j{{"channel", dec.channel},
                     {"residual_energy", dec.residual_energy},
                     {"chirplets", arr}};
    return j.dump(2);
}

}  // namespace pirsim::chirplet
