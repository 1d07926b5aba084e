#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pirsim/event_io.hpp"
#include "pirsim/svm.hpp"

namespace pirsim::classifier {

struct GridPoint {
    svm::Kernel kernel;
    double c = 1.0;
};

// rbf with gamma in 2^-7..2^3 and C in 2^-3..2^10, plus linear over the
// same C range.
std::vector<GridPoint> default_grid();

struct ClassStat {
    double min_acc = 0.0;  // % over folds
    double avg_acc = 0.0;
};

struct GridScore {
    GridPoint point;
    double avg_total = 0.0;
};

struct CvReport {
    std::string task;
    int folds = 0;
    uint64_t seed = 0;
    std::vector<std::string> class_names;  // index = label value
    std::vector<ClassStat> per_class;
    ClassStat total;
    GridPoint chosen;
    double chosen_avg_total = 0.0;
    std::vector<std::vector<std::vector<int>>> fold_confusions;  // fold x true x pred
    std::vector<GridScore> grid_scores;
    std::string selection_note;

    std::string to_json() const;
    std::string render_table() const;
};

// Stratified k-fold cross-validation over a hyperparameter grid; reports
// accuracies at the grid point with the best average total accuracy.
// labels hold class indices (binary: 0 and 1).
CvReport kfold_cv(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                  int k, const std::vector<GridPoint>& grid, uint64_t seed,
                  const std::string& task, const std::vector<std::string>& class_names);

enum class FeatureSet { e8, e8_rho, c60 };
const char* to_string(FeatureSet fs);
std::vector<std::vector<double>> feature_matrix(const io::FeatureFile& f, FeatureSet fs);
// 0 human, 1 animal, 2 clutter
std::vector<int> three_class_labels(const io::FeatureFile& f);

struct TrainedPipeline {
    svm::SvmModel stage1;  // c60: intruder vs clutter
    svm::SvmModel stage2;  // e8: human vs animal, evaluated on stage-1 intruders
    GridPoint stage1_grid, stage2_grid;
    std::string config_hash;
    uint64_t seed = 0;

    // 0 human, 1 animal, 2 clutter
    int classify(std::span<const double> c60, std::span<const double> e8) const;
    std::string to_json() const;
    static TrainedPipeline from_json(const std::string& text);
};

struct PipelineReport {
    int folds = 0;
    uint64_t seed = 0;
    // rows: Clutter, Intruder, Human, Animal, Overall
    std::array<ClassStat, 5> rows{};
    GridPoint stage1, stage2;
    std::vector<std::vector<std::vector<int>>> fold_confusions;  // 3x3, order h,a,c
    std::string selection_note;

    std::string to_json() const;
    std::string render_table() const;
};

struct PipelineResult {
    TrainedPipeline pipeline;
    PipelineReport report;
    CvReport stage1_cv;
    CvReport stage2_cv;
};

PipelineResult train_pipeline(const io::FeatureFile& features, const std::vector<GridPoint>& grid,
                              int folds, uint64_t seed);

}  // namespace pirsim::classifier
