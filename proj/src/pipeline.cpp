#include "anx/pipeline.hpp"

namespace anx::pipeline {

namespace {

Dataset dataset_for(const cohort::TrainSet& set, const features::Vocabulary& vocab, bool binary) {
    return features::build_dataset(set.examples, vocab, binary);
}

}  // namespace

TrainingOptions options_from_config(const Config& c) {
    TrainingOptions o;
    const std::uint64_t seed = c.unsigned_integer("seed");
    o.vocab = {c.size("min_count"), c.size("max_size")};
    o.nb_alpha = c.real("nb_alpha");
    o.logistic = {c.real("lr_lambda"), c.real("lr_learning_rate"), c.size("lr_epochs"), seed};
    const auto& lr_features = c.str("lr_features");
    if (lr_features != "binary" && lr_features != "counts") {
        throw ConfigError("lr_features must be 'binary' or 'counts'");
    }
    o.lr_binary = lr_features == "binary";

    o.encoder.d_model = c.size("d_model");
    o.encoder.n_heads = c.size("n_heads");
    o.encoder.n_layers = c.size("n_layers");
    o.encoder.d_ff = c.size("d_ff");
    o.encoder.max_len = c.size("max_len");
    o.encoder.dropout_p = c.real("dropout_p");
    o.encoder_training.learning_rate = c.real("learning_rate");
    o.encoder_training.adam_beta1 = c.real("adam_beta1");
    o.encoder_training.adam_beta2 = c.real("adam_beta2");
    o.encoder_training.adam_eps = c.real("adam_eps");
    o.encoder_training.epochs = c.size("epochs");
    o.encoder_training.batch_size = c.size("batch_size");
    o.encoder_training.seed = splitmix64(seed ^ 0x7472616eULL);
    o.init_seed = splitmix64(seed ^ 0x696e6974ULL);

    o.nb_alphas = c.real_list("grid_nb_alpha");
    o.lr_lambdas = c.real_list("grid_lr_lambda");
    o.validation_fraction = c.real("validation_fraction");
    o.validation_seed = splitmix64(seed ^ 0x76616cULL);
    return o;
}

std::unique_ptr<Classifier> fit_classifier(ModelKind kind, const cohort::TrainSet& train,
                                           const TrainingOptions& options,
                                           const transformer::EpochCallback& on_epoch) {
    auto vocab = features::fit_vocabulary(train, options.vocab);
    switch (kind) {
        case ModelKind::NaiveBayes: {
            auto model = baseline::nb_fit(dataset_for(train, vocab, true), options.nb_alpha);
            return std::make_unique<NaiveBayesClassifier>(std::move(vocab), std::move(model));
        }
        case ModelKind::Logistic: {
            auto fit = baseline::lr_fit(dataset_for(train, vocab, options.lr_binary), options.logistic);
            return std::make_unique<LogisticClassifier>(std::move(vocab), std::move(fit.model), options.lr_binary);
        }
        case ModelKind::Transformer: {
            auto cfg = options.encoder;
            cfg.vocab_size = vocab.size();
            std::vector<features::TokenSequence> seqs;
            std::vector<int> labels;
            for (const auto& ex : train.examples) {
                seqs.push_back(features::encode_text(ex.post.text, vocab, cfg.max_len));
                labels.push_back(ex.y());
            }
            auto init = transformer::EncoderModel::initialize(cfg, options.init_seed);
            auto result = transformer::train(std::move(init), seqs, labels, options.encoder_training, on_epoch);
            return std::make_unique<TransformerClassifier>(std::move(vocab), std::move(result.model));
        }
    }
    throw std::logic_error("fit_classifier: unknown model kind");
}

TunedModel tune_and_fit(ModelKind kind, const cohort::TrainSet& train, const TrainingOptions& options) {
    if (kind == ModelKind::Transformer) {
        throw std::invalid_argument("tune_and_fit: grid search covers the keyword models only");
    }
    const auto inner = cohort::split(train.examples, {options.validation_fraction, options.validation_seed,
                                                      cohort::SplitUnit::ByUser});
    if (inner.train.empty() || inner.test.empty()) {
        throw DataError("tune_and_fit: validation split left one side empty");
    }
    const auto vocab = features::fit_vocabulary(inner.train, options.vocab);
    const bool binary = kind == ModelKind::NaiveBayes || options.lr_binary;
    const auto fit_part = dataset_for(inner.train, vocab, binary);
    const auto val_part = features::build_dataset(inner.test.examples, vocab, binary);

    TunedModel out;
    TrainingOptions chosen = options;
    if (kind == ModelKind::NaiveBayes) {
        out.grid = eval::grid_search_nb(fit_part, val_part, options.nb_alphas);
        chosen.nb_alpha = out.grid.table[out.grid.best].regularization;
    } else {
        std::vector<baseline::LogisticConfig> configs;
        for (double lambda : options.lr_lambdas) {
            auto cfg = options.logistic;
            cfg.lambda = lambda;
            configs.push_back(cfg);
        }
        out.grid = eval::grid_search_lr(fit_part, val_part, configs);
        chosen.logistic.lambda = out.grid.table[out.grid.best].regularization;
    }
    out.classifier = fit_classifier(kind, train, chosen);
    return out;
}

}  // namespace anx::pipeline
