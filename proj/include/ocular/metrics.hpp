#pragma once

#include <span>
#include <string>

#include "ocular/tensor.hpp"

namespace ocular {

// All metrics use population (1/n) moments, so the concordance attenuation
// |ccc| <= |corr| holds exactly. NaN anywhere is an input error.

double rmse(std::span<const double> pred, std::span<const double> target);

// Pearson's correlation; throws "undefined correlation" on zero variance.
double pearson(std::span<const double> pred, std::span<const double> target);

// Lin's concordance correlation:
//   2 cov(p,t) / (var(p) + var(t) + (mean(p) - mean(t))^2)
// A zero denominator means both sequences are constant with equal means;
// that is 1 for identical sequences and an error otherwise.
double ccc(std::span<const double> pred, std::span<const double> target);

// Fraction of indices where sign(pred) == sign(target), sign in {-1,0,+1}.
double sagr(std::span<const double> pred, std::span<const double> target);

struct MetricRow {
    double rmse = 0.0;
    double corr = 0.0;
    double ccc = 0.0;
    double sagr = 0.0;
};

struct EvaluationReport {
    MetricRow valence;
    MetricRow arousal;
};

// predictions/targets are (n, 2): column 0 valence, column 1 arousal.
EvaluationReport evaluate_report(const Tensor& predictions, const Tensor& targets);

// Aligned table with one row per model/run label.
std::string format_report(const EvaluationReport& report, const std::string& label);
// Machine-readable key=value lines.
std::string report_key_values(const EvaluationReport& report);

}  // namespace ocular
