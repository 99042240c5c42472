#include "anx/logistic.hpp"

#include <cmath>
#include <sstream>

namespace anx::baseline {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

double margin(const LogisticRegressionModel& m, const SparseDoc& x) {
    double z = m.bias;
    for (std::size_t k = 0; k < x.cols.size(); ++k) {
        z += m.weights.at(x.cols[k]) * x.value(k);
    }
    return z;
}

// log(1 + e^z) without overflow.
double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

}  // namespace

double lr_loss(const LogisticRegressionModel& model, const Dataset& batch) {
    double ce = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double z = margin(model, batch.docs[i]);
        ce += softplus(z) - batch.y[i] * z;
    }
    double sq = 0.0;
    for (double w : model.weights) {
        sq += w * w;
    }
    return ce / static_cast<double>(batch.size()) + 0.5 * model.config.lambda * sq;
}

LogisticGradient lr_gradient(const LogisticRegressionModel& model, const Dataset& batch) {
    LogisticGradient g;
    g.weights.assign(model.dim(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const SparseDoc& x = batch.docs[i];
        const double r = (sigmoid(margin(model, x)) - batch.y[i]) * inv_n;
        g.bias += r;
        for (std::size_t k = 0; k < x.cols.size(); ++k) {
            g.weights[x.cols[k]] += r * x.value(k);
        }
    }
    for (std::size_t j = 0; j < model.dim(); ++j) {
        g.weights[j] += model.config.lambda * model.weights[j];
    }
    return g;
}

LogisticFit lr_fit(const Dataset& train, const LogisticConfig& config) {
    if (!(config.learning_rate > 0.0) || config.epochs < 1) {
        throw std::invalid_argument("lr_fit: need learning_rate > 0 and epochs >= 1");
    }
    if (!(config.lambda >= 0.0)) {
        throw std::invalid_argument("lr_fit: lambda must be non-negative");
    }
    if (train.size() == 0) {
        throw DataError("lr_fit: empty training set");
    }
    LogisticFit fit;
    fit.model.weights.assign(train.dim, 0.0);
    fit.model.config = config;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss = lr_loss(fit.model, train);
        if (!std::isfinite(loss)) {
            throw DivergenceError("lr_fit: non-finite loss at epoch " + std::to_string(epoch));
        }
        fit.loss_log.push_back(loss);
        const LogisticGradient g = lr_gradient(fit.model, train);
        for (std::size_t j = 0; j < train.dim; ++j) {
            fit.model.weights[j] -= config.learning_rate * g.weights[j];
        }
        fit.model.bias -= config.learning_rate * g.bias;
    }
    const double final_loss = lr_loss(fit.model, train);
    if (!std::isfinite(final_loss)) {
        throw DivergenceError("lr_fit: non-finite loss after epoch " + std::to_string(config.epochs));
    }
    fit.loss_log.push_back(final_loss);
    return fit;
}

double lr_predict_proba(const LogisticRegressionModel& model, const SparseDoc& x) {
    return sigmoid(margin(model, x));
}

std::string LogisticRegressionModel::serialize() const {
    std::ostringstream out;
    out << "anx-lr 1\n";
    out << "lambda " << format_double(config.lambda) << '\n';
    out << "learning_rate " << format_double(config.learning_rate) << '\n';
    out << "epochs " << config.epochs << '\n';
    out << "seed " << config.seed << '\n';
    out << "bias " << format_double(bias) << '\n';
    out << "dim " << weights.size() << '\n';
    for (std::size_t j = 0; j < weights.size(); ++j) {
        out << j << ' ' << format_double(weights[j]) << '\n';
    }
    return out.str();
}

LogisticRegressionModel LogisticRegressionModel::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "anx-lr" || version != 1) {
        throw DataError("logistic model: bad header");
    }
    LogisticRegressionModel m;
    std::string key;
    std::string value;
    auto expect = [&](const char* name) {
        if (!(in >> key >> value) || key != name) {
            throw DataError(std::string("logistic model: missing ") + name);
        }
        return value;
    };
    m.config.lambda = parse_double(expect("lambda"));
    m.config.learning_rate = parse_double(expect("learning_rate"));
    m.config.epochs = std::stoull(expect("epochs"));
    m.config.seed = std::stoull(expect("seed"));
    m.bias = parse_double(expect("bias"));
    const std::size_t dim = std::stoull(expect("dim"));
    m.weights.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        std::size_t idx = 0;
        if (!(in >> idx >> value) || idx != j) {
            throw DataError("logistic model: bad weight record " + std::to_string(j));
        }
        m.weights[j] = parse_double(value);
    }
    return m;
}

}  // namespace anx::baseline
