#include "anx/eval.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "anx/naive_bayes.hpp"

namespace anx::eval {

using json = nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t hit, std::size_t false_alarm, std::size_t miss) {
    ClassMetrics m;
    m.precision = ratio(hit, hit + false_alarm);
    m.recall = ratio(hit, hit + miss);
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
    return buf;
}

std::string dec(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

double accuracy_of(std::span<const double> scores, const Dataset& data) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        correct += static_cast<std::size_t>((scores[i] >= 0.5 ? 1 : 0) == data.y[i]);
    }
    return ratio(correct, data.size());
}

}  // namespace

EvalResult evaluate_scores(std::string model_id, std::span<const double> scores, std::span<const int> labels,
                           double threshold) {
    if (scores.empty()) {
        throw EmptyTestSetError("evaluate: empty test set");
    }
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("evaluate: scores and labels differ in length");
    }
    EvalResult r;
    r.model_id = std::move(model_id);
    r.n_examples = scores.size();
    std::size_t positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        const bool truth = labels[i] == 1;
        positives += truth ? 1 : 0;
        if (pred && truth) {
            ++r.tp;
        } else if (pred) {
            ++r.fp;
        } else if (truth) {
            ++r.fn;
        } else {
            ++r.tn;
        }
    }
    r.accuracy = ratio(r.tp + r.tn, r.n_examples);
    r.base_rate = ratio(positives, r.n_examples);
    r.positive = class_metrics(r.tp, r.fp, r.fn);
    r.negative = class_metrics(r.tn, r.fn, r.fp);
    return r;
}

EvalResult evaluate(const Classifier& model, std::string model_id, std::span<const cohort::LabeledExample> test,
                    double threshold) {
    if (test.empty()) {
        throw EmptyTestSetError("evaluate: empty test set");
    }
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(test.size());
    for (const auto& ex : test) {
        scores.push_back(model.score_text(ex.post.text));
        labels.push_back(ex.y());
    }
    return evaluate_scores(std::move(model_id), scores, labels, threshold);
}

std::string EvalResult::to_json() const {
    auto cm = [](const ClassMetrics& m) {
        return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    json j = {{"model_id", model_id}, {"n_examples", n_examples}, {"tp", tp},
              {"fp", fp},             {"tn", tn},                 {"fn", fn},
              {"accuracy", accuracy}, {"base_rate", base_rate},   {"positive", cm(positive)},
              {"negative", cm(negative)}};
    return j.dump(1) + "\n";
}

EvalResult EvalResult::from_json(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw DataError("eval result: invalid json");
    }
    try {
        EvalResult r;
        r.model_id = j.at("model_id").get<std::string>();
        r.n_examples = j.at("n_examples").get<std::size_t>();
        r.tp = j.at("tp").get<std::size_t>();
        r.fp = j.at("fp").get<std::size_t>();
        r.tn = j.at("tn").get<std::size_t>();
        r.fn = j.at("fn").get<std::size_t>();
        r.accuracy = j.at("accuracy").get<double>();
        r.base_rate = j.at("base_rate").get<double>();
        for (auto [key, m] : {std::pair{"positive", &r.positive}, std::pair{"negative", &r.negative}}) {
            m->precision = j.at(key).at("precision").get<double>();
            m->recall = j.at(key).at("recall").get<double>();
            m->f1 = j.at(key).at("f1").get<double>();
        }
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("eval result: ") + e.what());
    }
}

std::size_t select_best(std::span<const GridEntry> table) {
    if (table.empty()) {
        throw std::invalid_argument("grid search: empty grid");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& a = table[i];
        const auto& b = table[best];
        if (a.validation_accuracy > b.validation_accuracy ||
            (a.validation_accuracy == b.validation_accuracy && a.regularization < b.regularization)) {
            best = i;
        }
    }
    return best;
}

GridResult grid_search_nb(const Dataset& train, const Dataset& validation, std::span<const double> alphas) {
    if (alphas.empty()) {
        throw std::invalid_argument("grid search: empty grid");
    }
    GridResult result;
    for (double alpha : alphas) {
        const auto model = baseline::nb_fit(train, alpha);
        std::vector<double> scores;
        for (const auto& doc : validation.docs) {
            scores.push_back(baseline::nb_predict_proba(model, doc)[1]);
        }
        result.table.push_back({"alpha=" + format_double(alpha), alpha, accuracy_of(scores, validation)});
    }
    result.best = select_best(result.table);
    return result;
}

GridResult grid_search_lr(const Dataset& train, const Dataset& validation,
                          std::span<const baseline::LogisticConfig> configs) {
    if (configs.empty()) {
        throw std::invalid_argument("grid search: empty grid");
    }
    GridResult result;
    for (const auto& cfg : configs) {
        const auto fit = baseline::lr_fit(train, cfg);
        std::vector<double> scores;
        for (const auto& doc : validation.docs) {
            scores.push_back(baseline::lr_predict_proba(fit.model, doc));
        }
        result.table.push_back({"lambda=" + format_double(cfg.lambda) + " lr=" + format_double(cfg.learning_rate) +
                                    " epochs=" + std::to_string(cfg.epochs),
                                cfg.lambda, accuracy_of(scores, validation)});
    }
    result.best = select_best(result.table);
    return result;
}

std::string grid_table_tsv(const GridResult& result) {
    std::ostringstream out;
    out << "index\tconfig\tregularization\tvalidation_accuracy\tbest\n";
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const auto& e = result.table[i];
        out << i << '\t' << e.config << '\t' << format_double(e.regularization) << '\t'
            << format_double(e.validation_accuracy) << '\t' << (i == result.best ? "yes" : "no") << '\n';
    }
    return out.str();
}

std::string manifest_hash(std::string_view manifest_bytes) {
    return "fnv1a64:" + hex64(fnv1a64(manifest_bytes));
}

std::string report(const RunContext& context) {
    if (context.results.empty()) {
        throw std::invalid_argument("report: no evaluation results");
    }
    std::ostringstream out;
    out << "# " << context.title << "\n\n";
    out << "## Provenance\n\n";
    for (const auto& [key, value] : context.provenance) {
        out << "- " << key << ": " << value << '\n';
    }
    out << "- split manifest hash: " << (context.manifest_hash.empty() ? "none" : context.manifest_hash) << "\n\n";

    out << "## Results\n\n";
    out << "Positive class: AnxietyThenAdhd. Accuracy is post-level.\n\n";
    out << "| model | n | base rate | accuracy | TP | FP | TN | FN | P(+) | R(+) | F1(+) | P(-) | R(-) | F1(-) |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : context.results) {
        out << "| " << r.model_id << " | " << r.n_examples << " | " << pct(r.base_rate) << " | " << pct(r.accuracy)
            << " | " << r.tp << " | " << r.fp << " | " << r.tn << " | " << r.fn << " | " << dec(r.positive.precision)
            << " | " << dec(r.positive.recall) << " | " << dec(r.positive.f1) << " | " << dec(r.negative.precision)
            << " | " << dec(r.negative.recall) << " | " << dec(r.negative.f1) << " |\n";
    }
    out << "\n## Published reference accuracies (not reproducible here)\n\n";
    out << "Reference values from the original Reddit study at a 50% base rate. The underlying "
           "data is not distributed, so these are context, not targets this run can match.\n\n";
    out << "| model | reference accuracy |\n|---|---|\n";
    out << "| logistic regression (best) | 54% |\n";
    out << "| Bernoulli naive Bayes (best) | 58.6% |\n";
    out << "| fine-tuned RoBERTa | 76% |\n";
    if (!context.notes.empty()) {
        out << "\n## Notes\n\n";
        for (const auto& n : context.notes) {
            out << "- " << n << '\n';
        }
    }
    return out.str();
}

}  // namespace anx::eval
