#include "anx/synth.hpp"

#include <cmath>
#include <sstream>

namespace anx::synth {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) {
            out += ' ';
        }
        out += tokens[i];
    }
    return out;
}

std::string marker(char side, std::size_t k) {
    return std::string(side == 'a' ? "mka" : "mkb") + std::to_string(k);
}

std::string cue(int label, std::size_t k) {
    return std::string(label == 1 ? "cuepos" : "cueneg") + std::to_string(k);
}

constexpr std::int64_t kBaseTime = 1'600'000'000;

}  // namespace

std::string_view mode_name(Mode mode) {
    return mode == Mode::OrderSignal ? "order" : "unigram";
}

Mode parse_mode(std::string_view name) {
    if (name == "order" || name == "OrderSignal") {
        return Mode::OrderSignal;
    }
    if (name == "unigram" || name == "UnigramSignal") {
        return Mode::UnigramSignal;
    }
    throw InvalidSpecError("unknown synth mode '" + std::string(name) + "'");
}

void SynthSpec::validate() const {
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
        throw InvalidSpecError("signal_strength must lie in [0, 1]");
    }
    if (vocab_pool == 0) {
        throw InvalidSpecError("vocab pool must be nonempty");
    }
    if (users_per_class == 0 || posts_min == 0 || posts_min > posts_max) {
        throw InvalidSpecError("need users_per_class > 0 and 0 < posts_min <= posts_max");
    }
    if (doc_len_min < 2 || doc_len_min > doc_len_max) {
        throw InvalidSpecError("need 2 <= doc_len_min <= doc_len_max");
    }
    if (mode == Mode::OrderSignal && marker_pairs == 0) {
        throw InvalidSpecError("OrderSignal needs at least one marker pair");
    }
    if (mode == Mode::UnigramSignal && cue_tokens == 0) {
        throw InvalidSpecError("UnigramSignal needs at least one cue token");
    }
    if (forum.empty()) {
        throw InvalidSpecError("forum name must be nonempty");
    }
}

SynthCorpus generate(const SynthSpec& spec) {
    spec.validate();
    SynthCorpus corpus;

    for (std::size_t pair = 0; pair < spec.users_per_class; ++pair) {
        Rng rng(splitmix64(spec.seed ^ splitmix64(pair + 1)));
        const std::string pos_user = "synth_u" + std::to_string(pair) + "_p";
        const std::string neg_user = "synth_u" + std::to_string(pair) + "_n";
        const auto n_posts = static_cast<std::size_t>(
            rng.between(static_cast<std::int64_t>(spec.posts_min), static_cast<std::int64_t>(spec.posts_max)));

        for (std::size_t j = 0; j < n_posts; ++j) {
            const auto len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(spec.doc_len_min),
                                                                  static_cast<std::int64_t>(spec.doc_len_max)));
            std::vector<std::string> filler(len);
            for (auto& tok : filler) {
                tok = "w" + std::to_string(rng.below(spec.vocab_pool));
            }
            std::vector<std::string> pos_doc = filler;
            std::vector<std::string> neg_doc = filler;

            if (rng.uniform() < spec.signal_strength) {
                if (spec.mode == Mode::OrderSignal) {
                    const std::size_t k = rng.below(spec.marker_pairs);
                    std::size_t first = 0;
                    std::size_t second = 0;
                    if (spec.max_marker_gap == 0 || spec.max_marker_gap >= len - 1) {
                        first = rng.below(len);
                        second = rng.below(len - 1);
                        if (second >= first) {
                            ++second;
                        }
                        if (second < first) {
                            std::swap(first, second);
                        }
                    } else {
                        const std::size_t gap = 1 + rng.below(spec.max_marker_gap);
                        first = rng.below(len - gap);
                        second = first + gap;
                    }
                    pos_doc[first] = marker('a', k);
                    pos_doc[second] = marker('b', k);
                    neg_doc[first] = marker('b', k);
                    neg_doc[second] = marker('a', k);
                } else {
                    const std::size_t k = rng.below(spec.cue_tokens);
                    const std::size_t at = rng.below(len);
                    pos_doc[at] = cue(1, k);
                    neg_doc[at] = cue(0, k);
                }
            }

            const auto t = kBaseTime + static_cast<std::int64_t>(pair * 1000 + j) * 3600;
            const std::string suffix = std::to_string(pair) + "_" + std::to_string(j);
            corpus.examples.push_back(
                {{"sp" + suffix, pos_user, spec.forum, t, join_tokens(pos_doc)}, cohort::Label::AnxietyThenAdhd});
            corpus.examples.push_back(
                {{"sn" + suffix, neg_user, spec.forum, t, join_tokens(neg_doc)}, cohort::Label::AnxietyOnly});
            corpus.pair.insert(corpus.pair.end(), 2, pair);
        }
    }

    std::ostringstream truth;
    truth << "mode=" << mode_name(spec.mode) << " seed=" << spec.seed << " users_per_class=" << spec.users_per_class
          << " posts=" << spec.posts_min << ".." << spec.posts_max << " doc_len=" << spec.doc_len_min << ".."
          << spec.doc_len_max << " vocab_pool=" << spec.vocab_pool << " signal_strength="
          << format_double(spec.signal_strength) << '\n';
    if (spec.mode == Mode::OrderSignal) {
        truth << "label AnxietyThenAdhd iff marker mka<k> precedes mkb<k>, k in [0, " << spec.marker_pairs
              << "); max_marker_gap=" << spec.max_marker_gap
              << "; twins share token multisets so unigram statistics carry no signal\n";
    } else {
        truth << "label AnxietyThenAdhd iff a cuepos<k> token is present, AnxietyOnly iff cueneg<k>, k in [0, "
              << spec.cue_tokens << ")\n";
    }
    truth << "examples=" << corpus.examples.size() << '\n';
    corpus.ground_truth = truth.str();
    return corpus;
}

cohort::Split split_by_pair(const SynthCorpus& corpus, double test_fraction) {
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
        throw std::invalid_argument("split_by_pair: test_fraction must lie in [0, 1]");
    }
    if (corpus.pair.size() != corpus.examples.size()) {
        throw std::invalid_argument("split_by_pair: corpus has no pair index");
    }
    const std::size_t pairs = corpus.pair.empty() ? 0 : corpus.pair.back() + 1;
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(pairs)));
    cohort::Split s;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        if (corpus.pair[i] + n_test >= pairs) {
            s.test.examples.push_back(corpus.examples[i]);
        } else {
            s.train.examples.push_back(corpus.examples[i]);
        }
    }
    return s;
}

}  // namespace anx::synth
