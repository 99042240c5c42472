#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "anx/sparse.hpp"
#include "anx/util.hpp"

namespace anx::baseline {

/// Bernoulli naive Bayes over presence features. Class index 1 is positive.
struct NaiveBayesModel {
    double alpha{1.0};
    std::size_t dim{0};
    std::array<double, 2> log_prior{};
    std::array<std::vector<double>, 2> log_theta;            // log P(present | c)
    std::array<std::vector<double>, 2> log_one_minus_theta;  // log P(absent | c)

    std::string serialize() const;
    static NaiveBayesModel parse(std::string_view text);

    bool operator==(const NaiveBayesModel&) const = default;
};

class EmptyClassError : public DataError {
public:
    using DataError::DataError;
};

/// theta[c][j] = (#docs of c with j present + alpha) / (#docs of c + 2 alpha);
/// priors are class frequencies.
NaiveBayesModel nb_fit(const Dataset& train, double alpha = 1.0);

/// {P(class 0), P(class 1)}. Absent features contribute log(1 - theta).
std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model, const SparseDoc& x);

/// log P(x, c=1) - log P(x, c=0).
double nb_log_odds(const NaiveBayesModel& model, const SparseDoc& x);

}  // namespace anx::baseline
