#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "anx/sparse.hpp"
#include "anx/util.hpp"

namespace anx::baseline {

struct LogisticConfig {
    double lambda{1e-3};
    double learning_rate{0.1};
    std::size_t epochs{500};
    std::uint64_t seed{0};

    bool operator==(const LogisticConfig&) const = default;
};

struct LogisticRegressionModel {
    std::vector<double> weights;
    double bias{0.0};
    LogisticConfig config;

    std::size_t dim() const { return weights.size(); }

    std::string serialize() const;
    static LogisticRegressionModel parse(std::string_view text);

    bool operator==(const LogisticRegressionModel&) const = default;
};

struct LogisticGradient {
    std::vector<double> weights;
    double bias{0.0};
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

double sigmoid(double z);

/// Mean cross-entropy plus (lambda/2)|w|^2; the bias is not penalized.
double lr_loss(const LogisticRegressionModel& model, const Dataset& batch);

LogisticGradient lr_gradient(const LogisticRegressionModel& model, const Dataset& batch);

struct LogisticFit {
    LogisticRegressionModel model;
    std::vector<double> loss_log;  // loss before each step, then after the last
};

/// Full-batch gradient descent from zero weights.
LogisticFit lr_fit(const Dataset& train, const LogisticConfig& config);

double lr_predict_proba(const LogisticRegressionModel& model, const SparseDoc& x);

}  // namespace anx::baseline
