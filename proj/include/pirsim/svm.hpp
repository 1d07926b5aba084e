#pragma once

#include <span>
#include <string>
#include <vector>

namespace pirsim::svm {

struct Kernel {
    enum class Type { linear, rbf };
    Type type = Type::rbf;
    double gamma = 1.0;  // rbf only

    std::string name() const;
};

struct TrainOptions {
    double tol = 1e-3;        // KKT tolerance
    long max_passes = 100000; // hard cap on optimization sweeps
};

// Soft-margin binary SVM trained with sequential minimal (pairwise)
// optimization. Features are standardized with training-set statistics.
struct SvmModel {
    Kernel kernel;
    double c = 1.0;
    double bias = 0.0;
    std::vector<std::vector<double>> support_vectors;  // standardized space
    std::vector<double> coefficients;                  // alpha_i * y_i
    std::vector<double> feature_mean;
    std::vector<double> feature_std;

    double decision(std::span<const double> x) const;
    int predict(std::span<const double> x) const;  // +1 / -1

    std::string to_json() const;
    static SvmModel from_json(const std::string& text);
};

// Labels are +-1; requires both classes present and finite features.
// row_names (optional) appear in diagnostics for bad rows.
SvmModel train_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const Kernel& kernel, double c, const TrainOptions& opts = {},
                   const std::vector<std::string>* row_names = nullptr);

// Dual solver on a precomputed kernel matrix; exposed for the fold-level
// cross-validation driver which caches kernels.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    long iterations = 0;
};
SmoResult smo_solve(const std::vector<std::vector<double>>& gram, const std::vector<int>& y,
                    double c, const TrainOptions& opts);

double kernel_eval(const Kernel& k, std::span<const double> a, std::span<const double> b);

}  // namespace pirsim::svm
