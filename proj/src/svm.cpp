#include "pirsim/svm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "pirsim/util.hpp"

namespace pirsim::svm {

std::string Kernel::name() const { return type == Type::linear ? "linear" : "rbf"; }

double kernel_eval(const Kernel& k, std::span<const double> a, std::span<const double> b) {
    if (k.type == Kernel::Type::linear) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-k.gamma * d2);
}

// Keerthi-style SMO: repeatedly pick a KKT violator i, pair it with the j
// maximizing |E_i - E_j|, and solve the two-variable subproblem analytically.
SmoResult smo_solve(const std::vector<std::vector<double>>& gram, const std::vector<int>& y,
                    double c, const TrainOptions& opts) {
    const int n = static_cast<int>(y.size());
    SmoResult res;
    res.alpha.assign(static_cast<size_t>(n), 0.0);
    std::vector<double> err(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) err[static_cast<size_t>(i)] = -y[static_cast<size_t>(i)];
    double b = 0.0;
    const double tol = opts.tol;
    const double eps = 1e-12;

    auto take_step = [&](int i, int j) -> bool {
        if (i == j) return false;
        double ai = res.alpha[static_cast<size_t>(i)], aj = res.alpha[static_cast<size_t>(j)];
        int yi = y[static_cast<size_t>(i)], yj = y[static_cast<size_t>(j)];
        double ei = err[static_cast<size_t>(i)], ej = err[static_cast<size_t>(j)];
        double lo, hi;
        if (yi != yj) {
            lo = std::max(0.0, aj - ai);
            hi = std::min(c, c + aj - ai);
        } else {
            lo = std::max(0.0, ai + aj - c);
            hi = std::min(c, ai + aj);
        }
        if (hi - lo < eps) return false;
        double kii = gram[static_cast<size_t>(i)][static_cast<size_t>(i)];
        double kjj = gram[static_cast<size_t>(j)][static_cast<size_t>(j)];
        double kij = gram[static_cast<size_t>(i)][static_cast<size_t>(j)];
        double eta = kii + kjj - 2.0 * kij;
        double aj_new;
        if (eta > eps) {
            aj_new = std::clamp(aj + yj * (ei - ej) / eta, lo, hi);
        } else {
            // flat direction: move to the bound with the better objective
            double f_lo = yj * (ei - ej) * lo - 0.5 * eta * lo * lo;
            double f_hi = yj * (ei - ej) * hi - 0.5 * eta * hi * hi;
            aj_new = f_lo > f_hi + eps ? lo : hi;
        }
        if (std::abs(aj_new - aj) < eps * (aj_new + aj + eps)) return false;
        double ai_new = ai + yi * yj * (aj - aj_new);

        double b1 = b - ei - yi * (ai_new - ai) * kii - yj * (aj_new - aj) * kij;
        double b2 = b - ej - yi * (ai_new - ai) * kij - yj * (aj_new - aj) * kjj;
        double b_new;
        if (ai_new > eps && ai_new < c - eps)
            b_new = b1;
        else if (aj_new > eps && aj_new < c - eps)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        double di = yi * (ai_new - ai), dj = yj * (aj_new - aj), db = b_new - b;
        for (int t = 0; t < n; ++t)
            err[static_cast<size_t>(t)] += di * gram[static_cast<size_t>(i)][static_cast<size_t>(t)] +
                                           dj * gram[static_cast<size_t>(j)][static_cast<size_t>(t)] +
                                           db;
        res.alpha[static_cast<size_t>(i)] = ai_new;
        res.alpha[static_cast<size_t>(j)] = aj_new;
        b = b_new;
        return true;
    };

    auto examine = [&](int i) -> bool {
        double ai = res.alpha[static_cast<size_t>(i)];
        double ri = err[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
        bool violates = (ri < -tol && ai < c) || (ri > tol && ai > 0.0);
        if (!violates) return false;
        // second choice: max |E_i - E_j| over non-bound points
        int best = -1;
        double best_gap = -1.0;
        for (int j = 0; j < n; ++j) {
            double aj = res.alpha[static_cast<size_t>(j)];
            if (aj <= eps || aj >= c - eps) continue;
            double gap = std::abs(err[static_cast<size_t>(i)] - err[static_cast<size_t>(j)]);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best >= 0 && take_step(i, best)) return true;
        for (int off = 1; off < n; ++off)
            if (take_step(i, (i + off) % n)) return true;
        return false;
    };

    bool scan_all = true;
    for (long pass = 0; pass < opts.max_passes; ++pass) {
        res.iterations = pass + 1;
        int changed = 0;
        for (int i = 0; i < n; ++i) {
            if (!scan_all) {
                double ai = res.alpha[static_cast<size_t>(i)];
                if (ai <= eps || ai >= c - eps) continue;
            }
            if (examine(i)) ++changed;
        }
        if (scan_all) {
            if (changed == 0) break;
            scan_all = false;
        } else if (changed == 0) {
            scan_all = true;
        }
    }
    res.bias = b;
    return res;
}

SvmModel train_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const Kernel& kernel, double c, const TrainOptions& opts,
                   const std::vector<std::string>* row_names) {
    const int n = static_cast<int>(x.size());
    if (n < 2 || y.size() != x.size()) throw UsageError("train_svm: need matching x,y with n >= 2");
    const size_t dim = x[0].size();
    int pos = 0, neg = 0;
    for (int i = 0; i < n; ++i) {
        if (x[static_cast<size_t>(i)].size() != dim) throw UsageError("train_svm: ragged features");
        for (size_t d = 0; d < dim; ++d)
            if (!std::isfinite(x[static_cast<size_t>(i)][d])) {
                std::string who = row_names && i < static_cast<int>(row_names->size())
                                      ? (*row_names)[static_cast<size_t>(i)]
                                      : ("row " + std::to_string(i));
                throw DataError("train_svm: non-finite feature in " + who);
            }
        (y[static_cast<size_t>(i)] > 0 ? pos : neg)++;
        if (y[static_cast<size_t>(i)] != 1 && y[static_cast<size_t>(i)] != -1)
            throw UsageError("train_svm: labels must be +-1");
    }
    if (pos == 0 || neg == 0) throw UsageError("train_svm: both classes required");
    if (pos + neg < 2 || pos < 1 || neg < 1)
        throw UsageError("train_svm: need >= 1 example per class");

    SvmModel model;
    model.kernel = kernel;
    model.c = c;
    model.feature_mean.assign(dim, 0.0);
    model.feature_std.assign(dim, 0.0);
    for (const auto& row : x)
        for (size_t d = 0; d < dim; ++d) model.feature_mean[d] += row[d];
    for (auto& m : model.feature_mean) m /= n;
    for (const auto& row : x)
        for (size_t d = 0; d < dim; ++d) {
            double z = row[d] - model.feature_mean[d];
            model.feature_std[d] += z * z;
        }
    for (auto& s : model.feature_std) s = s > 0.0 ? std::sqrt(s / n) : 1.0;

    std::vector<std::vector<double>> xs(static_cast<size_t>(n), std::vector<double>(dim));
    for (int i = 0; i < n; ++i)
        for (size_t d = 0; d < dim; ++d)
            xs[static_cast<size_t>(i)][d] =
                (x[static_cast<size_t>(i)][d] - model.feature_mean[d]) / model.feature_std[d];

    std::vector<std::vector<double>> gram(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double k = kernel_eval(kernel, xs[static_cast<size_t>(i)], xs[static_cast<size_t>(j)]);
            gram[static_cast<size_t>(i)][static_cast<size_t>(j)] = k;
            gram[static_cast<size_t>(j)][static_cast<size_t>(i)] = k;
        }

    SmoResult sol = smo_solve(gram, y, c, opts);
    model.bias = sol.bias;
    for (int i = 0; i < n; ++i) {
        if (sol.alpha[static_cast<size_t>(i)] <= 0.0) continue;
        model.support_vectors.push_back(xs[static_cast<size_t>(i)]);
        model.coefficients.push_back(sol.alpha[static_cast<size_t>(i)] * y[static_cast<size_t>(i)]);
    }
    return model;
}

double SvmModel::decision(std::span<const double> x) const {
    if (x.size() != feature_mean.size())
        throw UsageError("svm: feature dimension mismatch (got " + std::to_string(x.size()) +
                         ", model wants " + std::to_string(feature_mean.size()) + ")");
    std::vector<double> z(x.size());
    for (size_t d = 0; d < x.size(); ++d) z[d] = (x[d] - feature_mean[d]) / feature_std[d];
    double f = bias;
    for (size_t s = 0; s < support_vectors.size(); ++s)
        f += coefficients[s] * kernel_eval(kernel, support_vectors[s], z);
    return f;
}

int SvmModel::predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }

std::string SvmModel::to_json() const {
    nlohmann::json j;
    j["kernel"] = kernel.name();
    j["gamma"] = kernel.gamma;
    j["c"] = c;
    j["bias"] = bias;
    j["support_vectors"] = support_vectors;
    j["coefficients"] = coefficients;
    j["feature_mean"] = feature_mean;
    j["feature_std"] = feature_std;
    return j.dump(2);
}

SvmModel SvmModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SvmModel m;
    m.kernel.type = j.at("kernel").get<std::string>() == "linear" ? Kernel::Type::linear
                                                                  : Kernel::Type::rbf;
    m.kernel.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    m.bias = j.at("bias").get<double>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_std = j.at("feature_std").get<std::vector<double>>();
    return m;
}

}  // namespace pirsim::svm
