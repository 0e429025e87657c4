#ifndef AISEL_UNCERTAINTY_METRICS_HPP
#define AISEL_UNCERTAINTY_METRICS_HPP

#include <limits>
#include <vector>

#include "aisel/error.hpp"
#include "aisel/pipeline/dataset.hpp"
#include "aisel/uncertainty/classifier.hpp"

namespace aisel::uncertainty {

/// Classification metrics. Class 1 is the positive class; sensitivity and
/// specificity are NaN unless the task is binary (or a denominator is zero).
struct Metrics {
    double accuracy = 0.0;
    double sensitivity = std::numeric_limits<double>::quiet_NaN();
    double specificity = std::numeric_limits<double>::quiet_NaN();
    /// confusion[true][predicted]
    std::vector<std::vector<std::size_t>> confusion;

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& row : confusion) {
            for (auto c : row) n += c;
        }
        return n;
    }
};

inline Metrics metrics_from_predictions(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    if (truth.empty()) throw ArgumentError("metrics on an empty test set");
    if (truth.size() != predicted.size()) throw ShapeError("truth and prediction lengths differ");
    Metrics m;
    m.confusion.assign(static_cast<std::size_t>(classes), std::vector<std::size_t>(static_cast<std::size_t>(classes), 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        m.confusion.at(static_cast<std::size_t>(truth[i])).at(static_cast<std::size_t>(predicted[i]))++;
        if (truth[i] == predicted[i]) ++correct;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    if (classes == 2) {
        const double tp = static_cast<double>(m.confusion[1][1]);
        const double fn = static_cast<double>(m.confusion[1][0]);
        const double tn = static_cast<double>(m.confusion[0][0]);
        const double fp = static_cast<double>(m.confusion[0][1]);
        if (tp + fn > 0) m.sensitivity = tp / (tp + fn);
        if (tn + fp > 0) m.specificity = tn / (tn + fp);
    }
    return m;
}

inline Metrics eval_metrics(const Classifier& clf, const pipeline::Dataset& test) {
    if (test.empty()) throw ArgumentError("eval_metrics on an empty test set");
    if (test.classes != clf.classes) throw ArgumentError("test set and classifier disagree on class count");
    return metrics_from_predictions(test.labels, predict_labels(clf, test.images), clf.classes);
}

} // namespace aisel::uncertainty

#endif
