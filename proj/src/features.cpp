#include "anx/features.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace anx::features {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

const char* const kSpecialNames[kNumSpecial] = {"<pad>", "<unk>", "<mask>", "<cls>"};

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_word_byte(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (c == '\'' && !current.empty() && i + 1 < text.size() &&
                   is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
            current.push_back('\'');
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

TrainingDocs::TrainingDocs(const cohort::TrainSet& train) {
    texts_.reserve(train.size());
    for (const auto& ex : train.examples) {
        texts_.push_back(ex.post.text);
    }
}

TrainingDocs TrainingDocs::from_texts(std::vector<std::string> texts) {
    TrainingDocs d;
    d.texts_ = std::move(texts);
    return d;
}

Vocabulary::Vocabulary() {
    for (const char* name : kSpecialNames) {
        add(name);
    }
}

void Vocabulary::add(std::string token) {
    index_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
    tokens_.push_back(std::move(token));
}

std::uint32_t Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end() || it->second < kNumSpecial) {
        return kUnk;
    }
    return it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return index_of(token) != kUnk;
}

std::string Vocabulary::serialize() const {
    std::ostringstream out;
    out << "anx-vocab 1 size=" << tokens_.size() << " specials=" << kNumSpecial
        << " min_count=" << options_.min_count << " max_size=" << options_.max_size << '\n';
    for (const auto& t : tokens_) {
        out << t << '\n';
    }
    return out.str();
}

Vocabulary Vocabulary::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != "anx-vocab" || version != 1) {
        throw DataError("vocabulary: bad header '" + header + "'");
    }
    std::size_t size = 0;
    std::size_t specials = 0;
    Vocabulary v;
    std::string kv;
    while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw DataError("vocabulary: bad header field '" + kv + "'");
        }
        const std::string key = kv.substr(0, eq);
        const std::size_t value = std::stoull(kv.substr(eq + 1));
        if (key == "size") {
            size = value;
        } else if (key == "specials") {
            specials = value;
        } else if (key == "min_count") {
            v.options_.min_count = value;
        } else if (key == "max_size") {
            v.options_.max_size = value;
        }
    }
    if (specials != kNumSpecial || size < kNumSpecial) {
        throw DataError("vocabulary: unexpected special count");
    }
    std::string line;
    for (std::size_t i = 0; i < size; ++i) {
        if (!std::getline(in, line)) {
            throw DataError("vocabulary: truncated file");
        }
        if (i < kNumSpecial) {
            if (line != kSpecialNames[i]) {
                throw DataError("vocabulary: special token mismatch at " + std::to_string(i));
            }
            continue;
        }
        if (line.empty() || v.index_.count(line) != 0) {
            throw DataError("vocabulary: empty or duplicate token at " + std::to_string(i));
        }
        v.add(line);
    }
    return v;
}

Vocabulary fit_vocabulary(const TrainingDocs& docs, const VocabOptions& options) {
    if (docs.texts().empty()) {
        throw EmptyCorpusError("fit_vocabulary: no documents");
    }
    std::map<std::string, std::size_t> freq;
    for (const auto& text : docs.texts()) {
        for (auto& tok : tokenize(text)) {
            ++freq[std::move(tok)];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (auto& [tok, n] : freq) {
        if (n >= options.min_count) {
            ranked.emplace_back(tok, n);
        }
    }
    // std::map iteration already gives lexicographic order; stable_sort keeps it for ties.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > options.max_size) {
        ranked.resize(options.max_size);
    }
    Vocabulary v;
    v.options_ = options;
    for (auto& [tok, n] : ranked) {
        v.add(tok);
    }
    return v;
}

Vocabulary fit_vocabulary(const cohort::TrainSet& train, const VocabOptions& options) {
    return fit_vocabulary(TrainingDocs(train), options);
}

FeatureVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab, std::string doc_id) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& t : tokens) {
        const std::uint32_t id = vocab.index_of(t);
        if (id >= kNumSpecial) {
            ++counts[id];
        }
    }
    FeatureVector fv;
    fv.doc_id = std::move(doc_id);
    for (auto [id, n] : counts) {
        fv.indices.push_back(id);
        fv.counts.push_back(n);
    }
    return fv;
}

FeatureVector vectorize_text(std::string_view text, const Vocabulary& vocab, std::string doc_id) {
    const auto tokens = tokenize(text);
    return vectorize(tokens, vocab, std::move(doc_id));
}

TokenSequence encode(std::span<const std::string> tokens, const Vocabulary& vocab, std::size_t max_len) {
    if (max_len == 0) {
        throw std::invalid_argument("encode: max_len must be positive");
    }
    TokenSequence seq;
    seq.ids.reserve(max_len);
    seq.ids.push_back(kCls);
    for (std::size_t i = 0; i < tokens.size() && seq.ids.size() < max_len; ++i) {
        seq.ids.push_back(vocab.index_of(tokens[i]));
    }
    seq.ids.resize(max_len, kPad);
    return seq;
}

TokenSequence encode_text(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
    const auto tokens = tokenize(text);
    return encode(tokens, vocab, max_len);
}

std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab) {
    std::vector<std::string> out;
    for (std::uint32_t id : seq.ids) {
        if (id == kCls || id == kPad) {
            continue;
        }
        out.push_back(vocab.token(id));
    }
    return out;
}

SparseDoc to_sparse(const FeatureVector& fv, bool binary) {
    SparseDoc d;
    d.cols.reserve(fv.indices.size());
    for (std::size_t k = 0; k < fv.indices.size(); ++k) {
        d.cols.push_back(fv.indices[k] - kNumSpecial);
        if (!binary) {
            d.vals.push_back(static_cast<double>(fv.counts[k]));
        }
    }
    return d;
}

Dataset build_dataset(std::span<const cohort::LabeledExample> examples, const Vocabulary& vocab, bool binary) {
    Dataset ds;
    ds.dim = vocab.feature_dim();
    ds.docs.reserve(examples.size());
    ds.y.reserve(examples.size());
    for (const auto& ex : examples) {
        ds.docs.push_back(to_sparse(vectorize_text(ex.post.text, vocab, ex.post.id), binary));
        ds.y.push_back(ex.y());
    }
    return ds;
}

}  // namespace anx::features
