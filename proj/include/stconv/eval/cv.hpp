#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stconv/eval/kfold.hpp"

namespace stconv::eval {

struct Prediction {
  std::string video_id;
  int truth = 0;
  int predicted = 0;
};

struct FoldReport {
  std::size_t fold_index = 0;
  double accuracy = 0.0;  // correct / total
  std::vector<Prediction> predictions;
};

struct CvSummary {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample (n - 1) form; 0 for a single fold
  std::vector<FoldReport> folds;
};

double mean(std::span<const double> values);
double sample_std(std::span<const double> values);

FoldReport make_report(std::size_t fold_index, std::vector<Prediction> predictions);
CvSummary summarize(std::vector<FoldReport> folds);

/// Trains on fold.train and predicts fold.test.
using FoldPipeline =
    std::function<std::vector<Prediction>(const Fold& fold, std::size_t fold_index)>;
CvSummary evaluate_cv(const std::vector<Fold>& folds, const FoldPipeline& pipeline);

/// report.csv: `fold,accuracy` rows.
std::string format_report_csv(const CvSummary& summary);
/// summary.txt: mean and std in percent with one decimal.
std::string format_summary(const CvSummary& summary);

}  // namespace stconv::eval
