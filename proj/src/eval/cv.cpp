#include "stconv/eval/cv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "stconv/error.hpp"

namespace stconv::eval {

double mean(std::span<const double> values) {
  require(!values.empty(), ErrorCode::empty_input, "mean of no values");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

FoldReport make_report(std::size_t fold_index, std::vector<Prediction> predictions) {
  require(!predictions.empty(), ErrorCode::empty_input,
          "fold " + std::to_string(fold_index) + " has no predictions");
  std::size_t correct = 0;
  for (const auto& p : predictions) correct += p.truth == p.predicted;
  FoldReport r;
  r.fold_index = fold_index;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  r.predictions = std::move(predictions);
  return r;
}

CvSummary summarize(std::vector<FoldReport> folds) {
  std::vector<double> acc;
  for (const auto& f : folds) acc.push_back(f.accuracy);
  CvSummary s;
  s.mean_accuracy = mean(acc);
  s.std_accuracy = sample_std(acc);
  s.folds = std::move(folds);
  return s;
}

CvSummary evaluate_cv(const std::vector<Fold>& folds, const FoldPipeline& pipeline) {
  std::vector<FoldReport> reports;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    reports.push_back(make_report(f, pipeline(folds[f], f)));
  }
  return summarize(std::move(reports));
}

std::string format_report_csv(const CvSummary& summary) {
  std::ostringstream out;
  out << "fold,accuracy\n";
  char buf[64];
  for (const auto& f : summary.folds) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", f.fold_index, f.accuracy);
    out << buf;
  }
  return out.str();
}

std::string format_summary(const CvSummary& summary) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "accuracy %.1f \xC2\xB1 %.1f (%zu folds)\n",
                100.0 * summary.mean_accuracy, 100.0 * summary.std_accuracy,
                summary.folds.size());
  return buf;
}

}  // namespace stconv::eval
