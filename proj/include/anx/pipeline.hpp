#pragma once

// Glue between the modules: turns a training split plus settings into a
// fitted classifier. Shared by the command-line tool and the acceptance suite.

#include <functional>
#include <memory>
#include <vector>

#include "anx/classifier.hpp"
#include "anx/cohort.hpp"
#include "anx/config.hpp"
#include "anx/encoder.hpp"
#include "anx/eval.hpp"
#include "anx/features.hpp"
#include "anx/logistic.hpp"

namespace anx::pipeline {

struct TrainingOptions {
    features::VocabOptions vocab;
    double nb_alpha{1.0};
    baseline::LogisticConfig logistic;
    bool lr_binary{true};
    transformer::EncoderConfig encoder;  // vocab_size is filled in from the fitted vocabulary
    transformer::TrainConfig encoder_training;
    std::uint64_t init_seed{0};

    // Grid search.
    std::vector<double> nb_alphas{0.01, 0.1, 0.5, 1, 2, 5};
    std::vector<double> lr_lambdas{0.0001, 0.001, 0.01, 0.1, 1};
    double validation_fraction{0.2};
    std::uint64_t validation_seed{0};
};

/// Reads every training-related key; seeds derive from `seed`.
TrainingOptions options_from_config(const Config& config);

std::unique_ptr<Classifier> fit_classifier(ModelKind kind, const cohort::TrainSet& train,
                                           const TrainingOptions& options,
                                           const transformer::EpochCallback& on_epoch = {});

struct TunedModel {
    std::unique_ptr<Classifier> classifier;
    eval::GridResult grid;
};

/// Splits `train` by user into an inner train and validation part, grid
/// searches the regularization strength on it, then refits the winner on all
/// of `train`. Keyword kinds only.
TunedModel tune_and_fit(ModelKind kind, const cohort::TrainSet& train, const TrainingOptions& options);

}  // namespace anx::pipeline
