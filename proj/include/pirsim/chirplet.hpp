#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace pirsim::chirplet {

// One Gaussian chirp atom: a * exp(j phi) * x(n; m, omega, c, d) with
// x(n) = (2 pi d^2)^(-1/4) exp(-((n-m)/(2d))^2) exp(j(omega (n-m) + c/2 (n-m)^2)).
struct Chirplet {
    double amplitude = 0.0;   // a, >= 0
    double phase = 0.0;       // phi, in [-pi, pi)
    double center = 0.0;      // m, samples (fractional after refinement)
    double frequency = 0.0;   // omega, rad/sample in [0, pi]
    double chirp_rate = 0.0;  // c, rad/sample^2
    double duration = 0.0;    // d, samples, > 0
};

struct Decomposition {
    std::vector<Chirplet> chirplets;          // greedy order
    std::vector<double> step_correlations;    // |<r,x>| / (|x||r|) at each pick
    double residual_energy = 0.0;             // fraction of input energy left
    std::string channel;
};

// Discrete analytic signal via the one-sided-spectrum method. Odd-length
// inputs are padded with one trailing zero (the output is one longer).
std::vector<std::complex<double>> analytic_signal(std::span<const double> s);

std::complex<double> atom_value(double m, double omega, double c, double d, double n);

// Unnormalized atom samples over [0, n_samples).
std::vector<std::complex<double>> make_atom(double m, double omega, double c, double d,
                                            int n_samples);

struct DictionaryParams {
    int m_step = 8;
    int omega_count = 65;                // omega_k = k*pi/64 -> 128-point DFT
    std::vector<double> chirp_rates;     // defaults to +-{0,1,2,4,8,16,32}*2^-18
    std::vector<double> durations;       // defaults to {8,16,32,64,128,256}
};

struct DecomposeOptions {
    int q = 3;
    DictionaryParams dict;
    double refine_rel_tol = 1e-6;
    int refine_max_passes = 50;
};

// Greedy matching pursuit over the coarse dictionary followed by per-atom
// coordinate-ascent refinement (golden-section line search per parameter).
Decomposition decompose(std::span<const std::complex<double>> analytic,
                        const DecomposeOptions& opts = {});

std::vector<std::complex<double>> reconstruct(const Decomposition& dec, int n_samples);

double reconstruction_snr_db(std::span<const std::complex<double>> signal,
                             std::span<const std::complex<double>> approx);

std::string decomposition_json(const Decomposition& dec);

}  // namespace pirsim::chirplet
