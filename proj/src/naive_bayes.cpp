#include "anx/naive_bayes.hpp"

#include <cmath>
#include <sstream>

namespace anx::baseline {

NaiveBayesModel nb_fit(const Dataset& train, double alpha) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("nb_fit: alpha must be positive");
    }
    std::array<double, 2> class_count{0.0, 0.0};
    std::array<std::vector<double>, 2> present{std::vector<double>(train.dim, 0.0),
                                               std::vector<double>(train.dim, 0.0)};
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int c = train.y[i];
        class_count[c] += 1.0;
        for (std::uint32_t j : train.docs[i].cols) {
            present[c][j] += 1.0;
        }
    }
    if (class_count[0] == 0.0 || class_count[1] == 0.0) {
        throw EmptyClassError("nb_fit: both classes must be present");
    }

    NaiveBayesModel m;
    m.alpha = alpha;
    m.dim = train.dim;
    const double n = class_count[0] + class_count[1];
    for (int c = 0; c < 2; ++c) {
        m.log_prior[c] = std::log(class_count[c] / n);
        const double denom = class_count[c] + 2.0 * alpha;
        m.log_theta[c].resize(train.dim);
        m.log_one_minus_theta[c].resize(train.dim);
        for (std::size_t j = 0; j < train.dim; ++j) {
            // Both numerators are exact counts, so the pair sums to 1 up to rounding.
            m.log_theta[c][j] = std::log((present[c][j] + alpha) / denom);
            m.log_one_minus_theta[c][j] = std::log((class_count[c] - present[c][j] + alpha) / denom);
        }
    }
    return m;
}

namespace {

std::array<double, 2> joint_log_likelihood(const NaiveBayesModel& m, const SparseDoc& x) {
    std::array<double, 2> ll{};
    for (int c = 0; c < 2; ++c) {
        double s = m.log_prior[c];
        for (std::size_t j = 0; j < m.dim; ++j) {
            s += m.log_one_minus_theta[c][j];
        }
        for (std::uint32_t j : x.cols) {
            if (j >= m.dim) {
                throw std::out_of_range("nb: feature column out of range");
            }
            s += m.log_theta[c][j] - m.log_one_minus_theta[c][j];
        }
        ll[c] = s;
    }
    return ll;
}

}  // namespace

std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model, const SparseDoc& x) {
    const auto ll = joint_log_likelihood(model, x);
    const double mx = std::max(ll[0], ll[1]);
    const double e0 = std::exp(ll[0] - mx);
    const double e1 = std::exp(ll[1] - mx);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

double nb_log_odds(const NaiveBayesModel& model, const SparseDoc& x) {
    const auto ll = joint_log_likelihood(model, x);
    return ll[1] - ll[0];
}

std::string NaiveBayesModel::serialize() const {
    std::ostringstream out;
    out << "anx-nb 1\n";
    out << "alpha " << format_double(alpha) << '\n';
    out << "dim " << dim << '\n';
    out << "log_prior " << format_double(log_prior[0]) << ' ' << format_double(log_prior[1]) << '\n';
    for (std::size_t j = 0; j < dim; ++j) {
        out << j << ' ' << format_double(log_theta[0][j]) << ' ' << format_double(log_one_minus_theta[0][j])
            << ' ' << format_double(log_theta[1][j]) << ' ' << format_double(log_one_minus_theta[1][j])
            << '\n';
    }
    return out.str();
}

NaiveBayesModel NaiveBayesModel::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    int version = 0;
    std::string key;
    std::string a;
    std::string b;
    NaiveBayesModel m;
    if (!(in >> magic >> version) || magic != "anx-nb" || version != 1) {
        throw DataError("naive bayes model: bad header");
    }
    if (!(in >> key >> a) || key != "alpha") {
        throw DataError("naive bayes model: missing alpha");
    }
    m.alpha = parse_double(a);
    if (!(in >> key >> m.dim) || key != "dim") {
        throw DataError("naive bayes model: missing dim");
    }
    if (!(in >> key >> a >> b) || key != "log_prior") {
        throw DataError("naive bayes model: missing log_prior");
    }
    m.log_prior = {parse_double(a), parse_double(b)};
    for (int c = 0; c < 2; ++c) {
        m.log_theta[c].resize(m.dim);
        m.log_one_minus_theta[c].resize(m.dim);
    }
    for (std::size_t j = 0; j < m.dim; ++j) {
        std::size_t idx = 0;
        std::string t0, u0, t1, u1;
        if (!(in >> idx >> t0 >> u0 >> t1 >> u1) || idx != j) {
            throw DataError("naive bayes model: bad feature record " + std::to_string(j));
        }
        m.log_theta[0][j] = parse_double(t0);
        m.log_one_minus_theta[0][j] = parse_double(u0);
        m.log_theta[1][j] = parse_double(t1);
        m.log_one_minus_theta[1][j] = parse_double(u1);
    }
    return m;
}

}  // namespace anx::baseline
