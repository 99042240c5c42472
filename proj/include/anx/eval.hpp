#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anx/classifier.hpp"
#include "anx/cohort.hpp"
#include "anx/logistic.hpp"

namespace anx::eval {

struct ClassMetrics {
    double precision{0.0};
    double recall{0.0};
    double f1{0.0};

    bool operator==(const ClassMetrics&) const = default;
};

/// Positive class is AnxietyThenAdhd.
struct EvalResult {
    std::string model_id;
    std::size_t n_examples{0};
    std::size_t tp{0};
    std::size_t fp{0};
    std::size_t tn{0};
    std::size_t fn{0};
    double accuracy{0.0};
    double base_rate{0.0};
    ClassMetrics positive;
    ClassMetrics negative;

    std::string to_json() const;
    static EvalResult from_json(std::string_view text);

    bool operator==(const EvalResult&) const = default;
};

class EmptyTestSetError : public DataError {
public:
    using DataError::DataError;
};

/// Predict positive when score >= threshold. Rates with an empty denominator are 0.
EvalResult evaluate_scores(std::string model_id, std::span<const double> scores, std::span<const int> labels,
                           double threshold = 0.5);

EvalResult evaluate(const Classifier& model, std::string model_id,
                    std::span<const cohort::LabeledExample> test, double threshold = 0.5);

struct GridEntry {
    std::string config;     // human-readable description
    double regularization;  // alpha for NB, lambda for LR
    double validation_accuracy{0.0};
};

struct GridResult {
    std::size_t best{0};
    std::vector<GridEntry> table;  // declaration order
};

/// argmax validation accuracy; ties go to the smaller regularization, then
/// the earlier declaration.
std::size_t select_best(std::span<const GridEntry> table);

GridResult grid_search_nb(const Dataset& train, const Dataset& validation, std::span<const double> alphas);
GridResult grid_search_lr(const Dataset& train, const Dataset& validation,
                          std::span<const baseline::LogisticConfig> configs);

std::string grid_table_tsv(const GridResult& result);

struct RunContext {
    std::string title{"Run report"};
    std::vector<std::pair<std::string, std::string>> provenance;  // printed in order
    std::string manifest_hash;                                     // empty if no manifest
    std::vector<EvalResult> results;
    std::vector<std::string> notes;
};

/// Hash recorded for a split manifest file's bytes.
std::string manifest_hash(std::string_view manifest_bytes);

/// Markdown report. Throws std::invalid_argument when there are no results.
std::string report(const RunContext& context);

}  // namespace anx::eval
