#include "anx/encoder.hpp"

#include <cmath>
#include <sstream>

namespace anx::transformer {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = stddev * rng.normal();
    }
    return m;
}

// Row-wise layer norm. `hat` and `inv_std` are kept for the backward pass.
Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, Matrix& hat,
                  Eigen::VectorXd& inv_std) {
    const auto d = static_cast<double>(x.cols());
    hat.resize(x.rows(), x.cols());
    inv_std.resize(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).sum() / d;
        const auto centered = (x.row(r).array() - mean).matrix();
        const double var = centered.squaredNorm() / d;
        inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
        hat.row(r) = centered * inv_std(r);
    }
    Matrix y = hat.array().rowwise() * gain.row(0).array();
    y.rowwise() += bias.row(0);
    return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& hat, const Eigen::VectorXd& inv_std,
                           const Matrix& gain, Matrix& dgain, Matrix& dbias) {
    dgain.row(0) += (dy.array() * hat.array()).colwise().sum().matrix();
    dbias.row(0) += dy.colwise().sum();
    const auto d = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const Eigen::RowVectorXd dhat = dy.row(r).array() * gain.row(0).array();
        const double mean_dhat = dhat.sum() / d;
        const double mean_dhat_hat = dhat.dot(hat.row(r)) / d;
        dx.row(r) = inv_std(r) * (dhat.array() - mean_dhat - hat.row(r).array() * mean_dhat_hat).matrix();
    }
    return dx;
}

struct LayerCache {
    Matrix ln1_hat;
    Eigen::VectorXd ln1_inv;
    Matrix h1, q, k, v;
    std::vector<Matrix> probs;  // per head, L x L
    Matrix o;
    Matrix ln2_hat;
    Eigen::VectorXd ln2_inv;
    Matrix h2, u, r;
};

struct SequenceCache {
    std::vector<std::uint32_t> ids;  // non-PAD prefix
    std::vector<LayerCache> layers;
    Matrix final_hat;  // 1 x d, CLS row only
    Eigen::VectorXd final_inv;
    Eigen::RowVectorXd dropout_scale;  // 1/(1-p) or 0 per unit; empty in eval mode
    Eigen::RowVectorXd pooled;         // classifier input after dropout
};

std::size_t effective_length(const EncoderConfig& cfg, std::span<const std::uint32_t> ids) {
    if (ids.empty() || ids.size() > cfg.max_len) {
        throw ShapeMismatchError("sequence length " + std::to_string(ids.size()) + " outside [1, " +
                                 std::to_string(cfg.max_len) + "]");
    }
    if (ids[0] != features::kCls) {
        throw ShapeMismatchError("sequence must start with CLS");
    }
    std::size_t len = ids.size();
    while (len > 1 && ids[len - 1] == features::kPad) {
        --len;
    }
    for (std::size_t t = 0; t < len; ++t) {
        if (ids[t] == features::kPad) {
            throw ShapeMismatchError("PAD inside sequence at position " + std::to_string(t));
        }
        if (ids[t] >= cfg.vocab_size) {
            throw ShapeMismatchError("token id " + std::to_string(ids[t]) + " outside vocabulary");
        }
    }
    return len;
}

Eigen::RowVectorXd run_forward(const EncoderModel& model, std::span<const std::uint32_t> ids,
                               const ForwardOptions& options, SequenceCache* cache) {
    const EncoderConfig& cfg = model.config;
    const EncoderParams& p = model.params;
    const std::size_t len = effective_length(cfg, ids);
    if (static_cast<std::size_t>(p.position_embedding.rows()) < len ||
        static_cast<std::size_t>(p.token_embedding.rows()) != cfg.vocab_size) {
        throw ShapeMismatchError("parameters do not match the encoder config");
    }
    const auto L = static_cast<Eigen::Index>(len);
    const auto d = static_cast<Eigen::Index>(cfg.d_model);
    const auto dh = static_cast<Eigen::Index>(cfg.d_model / cfg.n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    SequenceCache local;
    SequenceCache& c = cache ? *cache : local;
    c.ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(len));
    c.layers.resize(cfg.n_layers);
    if (options.attention) {
        options.attention->assign(cfg.n_layers, {});
    }

    Matrix x(L, d);
    for (Eigen::Index t = 0; t < L; ++t) {
        x.row(t) = p.token_embedding.row(c.ids[t]) + p.position_embedding.row(t);
    }

    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const LayerParams& lp = p.layers[l];
        LayerCache& lc = c.layers[l];

        lc.h1 = layer_norm(x, lp.ln1_gain, lp.ln1_bias, lc.ln1_hat, lc.ln1_inv);
        lc.q = lc.h1 * lp.wq;
        lc.q.rowwise() += lp.bq.row(0);
        lc.k = lc.h1 * lp.wk;
        lc.k.rowwise() += lp.bk.row(0);
        lc.v = lc.h1 * lp.wv;
        lc.v.rowwise() += lp.bv.row(0);

        lc.o.resize(L, d);
        lc.probs.resize(cfg.n_heads);
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const auto off = static_cast<Eigen::Index>(h) * dh;
            Matrix scores = (lc.q.middleCols(off, dh) * lc.k.middleCols(off, dh).transpose()) * scale;
            for (Eigen::Index r = 0; r < L; ++r) {
                const double mx = scores.row(r).maxCoeff();
                scores.row(r) = (scores.row(r).array() - mx).exp().matrix();
                scores.row(r) /= scores.row(r).sum();
            }
            lc.o.middleCols(off, dh) = scores * lc.v.middleCols(off, dh);
            lc.probs[h] = std::move(scores);
            if (options.attention) {
                (*options.attention)[l].push_back(lc.probs[h]);
            }
        }
        Matrix attn = lc.o * lp.wo;
        attn.rowwise() += lp.bo.row(0);
        x += attn;

        lc.h2 = layer_norm(x, lp.ln2_gain, lp.ln2_bias, lc.ln2_hat, lc.ln2_inv);
        lc.u = lc.h2 * lp.w1;
        lc.u.rowwise() += lp.b1.row(0);
        lc.r = lc.u.cwiseMax(0.0);
        Matrix ff = lc.r * lp.w2;
        ff.rowwise() += lp.b2.row(0);
        x += ff;
    }

    Matrix cls = x.topRows(1);
    Matrix pooled = layer_norm(cls, p.final_ln_gain, p.final_ln_bias, c.final_hat, c.final_inv);
    c.pooled = pooled.row(0);
    c.dropout_scale.resize(0);
    if (options.train_mode && cfg.dropout_p > 0.0) {
        Rng rng(splitmix64(options.seed));
        const double keep_scale = 1.0 / (1.0 - cfg.dropout_p);
        c.dropout_scale.resize(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            c.dropout_scale(j) = rng.uniform() >= cfg.dropout_p ? keep_scale : 0.0;
        }
        c.pooled = c.pooled.cwiseProduct(c.dropout_scale);
    }
    Eigen::RowVectorXd logits = c.pooled * p.head_weight;
    logits += p.head_bias.row(0);
    return logits;
}

// Accumulates d(loss)/d(params) for one sequence given d(loss)/d(logits).
void run_backward(const EncoderModel& model, const SequenceCache& c, const Eigen::RowVectorXd& dlogits,
                  EncoderParams& g) {
    const EncoderConfig& cfg = model.config;
    const EncoderParams& p = model.params;
    const auto L = static_cast<Eigen::Index>(c.ids.size());
    const auto d = static_cast<Eigen::Index>(cfg.d_model);
    const auto dh = static_cast<Eigen::Index>(cfg.d_model / cfg.n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    g.head_weight += c.pooled.transpose() * dlogits;
    g.head_bias.row(0) += dlogits;
    Eigen::RowVectorXd dpooled = dlogits * p.head_weight.transpose();
    if (c.dropout_scale.size() > 0) {
        dpooled = dpooled.cwiseProduct(c.dropout_scale);
    }
    Matrix dcls = layer_norm_backward(dpooled, c.final_hat, c.final_inv, p.final_ln_gain, g.final_ln_gain,
                                      g.final_ln_bias);
    Matrix dx = Matrix::Zero(L, d);
    dx.row(0) = dcls.row(0);

    for (std::size_t li = cfg.n_layers; li-- > 0;) {
        const LayerParams& lp = p.layers[li];
        LayerParams& lg = g.layers[li];
        const LayerCache& lc = c.layers[li];

        // Feed-forward block; dx flows through the residual unchanged.
        lg.w2 += lc.r.transpose() * dx;
        lg.b2.row(0) += dx.colwise().sum();
        Matrix du = (dx * lp.w2.transpose()).cwiseProduct((lc.u.array() > 0.0).cast<double>().matrix());
        lg.w1 += lc.h2.transpose() * du;
        lg.b1.row(0) += du.colwise().sum();
        Matrix dh2 = du * lp.w1.transpose();
        dx += layer_norm_backward(dh2, lc.ln2_hat, lc.ln2_inv, lp.ln2_gain, lg.ln2_gain, lg.ln2_bias);

        // Attention block.
        lg.wo += lc.o.transpose() * dx;
        lg.bo.row(0) += dx.colwise().sum();
        Matrix dout = dx * lp.wo.transpose();
        Matrix dq(L, d);
        Matrix dk(L, d);
        Matrix dv(L, d);
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const auto off = static_cast<Eigen::Index>(h) * dh;
            const Matrix& probs = lc.probs[h];
            const auto dout_h = dout.middleCols(off, dh);
            dv.middleCols(off, dh) = probs.transpose() * dout_h;
            Matrix dprobs = dout_h * lc.v.middleCols(off, dh).transpose();
            const Eigen::VectorXd row_dot = (dprobs.array() * probs.array()).rowwise().sum();
            Matrix dscores = (probs.array() * (dprobs.array().colwise() - row_dot.array())).matrix() * scale;
            dq.middleCols(off, dh) = dscores * lc.k.middleCols(off, dh);
            dk.middleCols(off, dh) = dscores.transpose() * lc.q.middleCols(off, dh);
        }
        lg.wq += lc.h1.transpose() * dq;
        lg.bq.row(0) += dq.colwise().sum();
        lg.wk += lc.h1.transpose() * dk;
        lg.bk.row(0) += dk.colwise().sum();
        lg.wv += lc.h1.transpose() * dv;
        lg.bv.row(0) += dv.colwise().sum();
        Matrix dh1 = dq * lp.wq.transpose() + dk * lp.wk.transpose() + dv * lp.wv.transpose();
        dx += layer_norm_backward(dh1, lc.ln1_hat, lc.ln1_inv, lp.ln1_gain, lg.ln1_gain, lg.ln1_bias);
    }

    for (Eigen::Index t = 0; t < L; ++t) {
        g.token_embedding.row(c.ids[t]) += dx.row(t);
        g.position_embedding.row(t) += dx.row(t);
    }
}

// Stable log-softmax cross-entropy; writes softmax probabilities to `probs`.
double cross_entropy(const Eigen::RowVectorXd& logits, int label, Eigen::RowVectorXd& probs) {
    const double mx = logits.maxCoeff();
    probs = (logits.array() - mx).exp().matrix();
    const double z = probs.sum();
    probs /= z;
    return (mx + std::log(z)) - logits(label);
}

void check_batch(std::span<const features::TokenSequence> batch, std::span<const int> labels) {
    if (batch.size() != labels.size() || batch.empty()) {
        throw ShapeMismatchError("batch and labels must be nonempty and the same length");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw DataError("labels must be 0 or 1");
        }
    }
}

}  // namespace

void EncoderConfig::validate() const {
    if (vocab_size <= features::kNumSpecial) {
        throw std::invalid_argument("encoder: vocab_size must exceed the special tokens");
    }
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
        throw std::invalid_argument("encoder: d_model must be a positive multiple of n_heads");
    }
    if (d_ff == 0 || max_len < 1 || n_classes != 2) {
        throw std::invalid_argument("encoder: bad d_ff, max_len or n_classes");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw std::invalid_argument("encoder: dropout_p must lie in [0, 1)");
    }
}

std::vector<std::pair<std::string, Matrix*>> EncoderParams::named() {
    std::vector<std::pair<std::string, Matrix*>> out;
    out.emplace_back("token_embedding", &token_embedding);
    out.emplace_back("position_embedding", &position_embedding);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        LayerParams& lp = layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        out.emplace_back(pre + "ln1_gain", &lp.ln1_gain);
        out.emplace_back(pre + "ln1_bias", &lp.ln1_bias);
        out.emplace_back(pre + "wq", &lp.wq);
        out.emplace_back(pre + "bq", &lp.bq);
        out.emplace_back(pre + "wk", &lp.wk);
        out.emplace_back(pre + "bk", &lp.bk);
        out.emplace_back(pre + "wv", &lp.wv);
        out.emplace_back(pre + "bv", &lp.bv);
        out.emplace_back(pre + "wo", &lp.wo);
        out.emplace_back(pre + "bo", &lp.bo);
        out.emplace_back(pre + "ln2_gain", &lp.ln2_gain);
        out.emplace_back(pre + "ln2_bias", &lp.ln2_bias);
        out.emplace_back(pre + "w1", &lp.w1);
        out.emplace_back(pre + "b1", &lp.b1);
        out.emplace_back(pre + "w2", &lp.w2);
        out.emplace_back(pre + "b2", &lp.b2);
    }
    out.emplace_back("final_ln_gain", &final_ln_gain);
    out.emplace_back("final_ln_bias", &final_ln_bias);
    out.emplace_back("head_weight", &head_weight);
    out.emplace_back("head_bias", &head_bias);
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> EncoderParams::named() const {
    auto mut = const_cast<EncoderParams*>(this)->named();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(mut.size());
    for (auto& [name, ptr] : mut) {
        out.emplace_back(std::move(name), ptr);
    }
    return out;
}

EncoderParams EncoderParams::zeros_like() const {
    EncoderParams z = *this;
    z.set_zero();
    return z;
}

void EncoderParams::set_zero() {
    for (auto& [name, m] : named()) {
        m->setZero();
    }
}

bool EncoderParams::all_finite() const {
    for (const auto& [name, m] : named()) {
        if (!m->allFinite()) {
            return false;
        }
    }
    return true;
}

bool EncoderParams::operator==(const EncoderParams& other) const {
    const auto a = named();
    const auto b = other.named();
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].second->rows() != b[i].second->rows() || a[i].second->cols() != b[i].second->cols() ||
            *a[i].second != *b[i].second) {
            return false;
        }
    }
    return true;
}

EncoderModel EncoderModel::initialize(const EncoderConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const std::size_t d = config.d_model;
    const double proj_std = 1.0 / std::sqrt(static_cast<double>(d));
    const double ff_std = 1.0 / std::sqrt(static_cast<double>(config.d_ff));

    EncoderModel m;
    m.config = config;
    EncoderParams& p = m.params;
    p.token_embedding = normal_matrix(config.vocab_size, d, 0.1, rng);
    p.position_embedding = normal_matrix(config.max_len, d, 0.1, rng);
    p.layers.resize(config.n_layers);
    for (LayerParams& lp : p.layers) {
        lp.ln1_gain = Matrix::Ones(1, d);
        lp.ln1_bias = Matrix::Zero(1, d);
        lp.wq = normal_matrix(d, d, proj_std, rng);
        lp.bq = Matrix::Zero(1, d);
        lp.wk = normal_matrix(d, d, proj_std, rng);
        lp.bk = Matrix::Zero(1, d);
        lp.wv = normal_matrix(d, d, proj_std, rng);
        lp.bv = Matrix::Zero(1, d);
        lp.wo = normal_matrix(d, d, proj_std, rng);
        lp.bo = Matrix::Zero(1, d);
        lp.ln2_gain = Matrix::Ones(1, d);
        lp.ln2_bias = Matrix::Zero(1, d);
        lp.w1 = normal_matrix(d, config.d_ff, proj_std, rng);
        lp.b1 = Matrix::Zero(1, config.d_ff);
        lp.w2 = normal_matrix(config.d_ff, d, ff_std, rng);
        lp.b2 = Matrix::Zero(1, d);
    }
    p.final_ln_gain = Matrix::Ones(1, d);
    p.final_ln_bias = Matrix::Zero(1, d);
    p.head_weight = Matrix::Zero(d, config.n_classes);
    p.head_bias = Matrix::Zero(1, config.n_classes);
    return m;
}

Eigen::RowVectorXd forward_one(const EncoderModel& model, std::span<const std::uint32_t> ids,
                               const ForwardOptions& options) {
    return run_forward(model, ids, options, nullptr);
}

Matrix forward(const EncoderModel& model, std::span<const features::TokenSequence> batch, bool train_mode,
               std::uint64_t seed) {
    Matrix logits(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(model.config.n_classes));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        ForwardOptions opt{train_mode, splitmix64(seed + i), nullptr};
        logits.row(static_cast<Eigen::Index>(i)) = run_forward(model, batch[i].ids, opt, nullptr);
    }
    return logits;
}

LossAndGrad loss_and_backward(const EncoderModel& model, std::span<const features::TokenSequence> batch,
                              std::span<const int> labels, bool train_mode, std::uint64_t seed) {
    check_batch(batch, labels);
    LossAndGrad out;
    out.grad = model.params.zeros_like();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    SequenceCache cache;
    Eigen::RowVectorXd probs;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        ForwardOptions opt{train_mode, splitmix64(seed + i), nullptr};
        const Eigen::RowVectorXd logits = run_forward(model, batch[i].ids, opt, &cache);
        const double loss = cross_entropy(logits, labels[i], probs);
        if (!std::isfinite(loss)) {
            throw NonFiniteLossError("non-finite loss", 0);
        }
        out.loss += loss * inv_n;
        Eigen::Index argmax = 0;
        logits.maxCoeff(&argmax);
        if (static_cast<int>(argmax) == labels[i] && logits(0) != logits(1)) {
            ++out.correct;
        }
        Eigen::RowVectorXd dlogits = probs;
        dlogits(labels[i]) -= 1.0;
        run_backward(model, cache, dlogits * inv_n, out.grad);
    }
    return out;
}

double loss_only(const EncoderModel& model, std::span<const features::TokenSequence> batch,
                 std::span<const int> labels) {
    check_batch(batch, labels);
    double total = 0.0;
    Eigen::RowVectorXd probs;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += cross_entropy(run_forward(model, batch[i].ids, {}, nullptr), labels[i], probs);
    }
    return total / static_cast<double>(batch.size());
}

Matrix predict_proba(const EncoderModel& model, std::span<const features::TokenSequence> batch) {
    Matrix out = forward(model, batch, false, 0);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double mx = out.row(r).maxCoeff();
        out.row(r) = (out.row(r).array() - mx).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

std::string EncoderModel::serialize() const {
    std::ostringstream out;
    out << "anx-encoder 1\n";
    out << "vocab_size " << config.vocab_size << '\n';
    out << "d_model " << config.d_model << '\n';
    out << "n_heads " << config.n_heads << '\n';
    out << "n_layers " << config.n_layers << '\n';
    out << "d_ff " << config.d_ff << '\n';
    out << "max_len " << config.max_len << '\n';
    out << "dropout_p " << format_double(config.dropout_p) << '\n';
    out << "n_classes " << config.n_classes << '\n';
    for (const auto& [name, m] : params.named()) {
        out << "tensor " << name << ' ' << m->rows() << ' ' << m->cols() << '\n';
        for (Eigen::Index r = 0; r < m->rows(); ++r) {
            for (Eigen::Index c = 0; c < m->cols(); ++c) {
                out << (c ? " " : "") << format_double((*m)(r, c));
            }
            out << '\n';
        }
    }
    return out.str();
}

EncoderModel EncoderModel::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "anx-encoder" || version != 1) {
        throw DataError("encoder checkpoint: bad header");
    }
    EncoderConfig cfg;
    std::string key;
    std::string value;
    auto expect = [&](const char* name) {
        if (!(in >> key >> value) || key != name) {
            throw DataError(std::string("encoder checkpoint: missing ") + name);
        }
        return value;
    };
    cfg.vocab_size = std::stoull(expect("vocab_size"));
    cfg.d_model = std::stoull(expect("d_model"));
    cfg.n_heads = std::stoull(expect("n_heads"));
    cfg.n_layers = std::stoull(expect("n_layers"));
    cfg.d_ff = std::stoull(expect("d_ff"));
    cfg.max_len = std::stoull(expect("max_len"));
    cfg.dropout_p = parse_double(expect("dropout_p"));
    cfg.n_classes = std::stoull(expect("n_classes"));
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("encoder checkpoint: ") + e.what());
    }

    EncoderModel m = initialize(cfg, 0);
    for (auto& [name, mat] : m.params.named()) {
        std::string tag;
        std::string got;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        if (!(in >> tag >> got >> rows >> cols) || tag != "tensor" || got != name || rows != mat->rows() ||
            cols != mat->cols()) {
            throw DataError("encoder checkpoint: expected tensor " + name);
        }
        for (Eigen::Index i = 0; i < mat->size(); ++i) {
            if (!(in >> value)) {
                throw DataError("encoder checkpoint: truncated tensor " + name);
            }
            mat->data()[i] = parse_double(value);
        }
    }
    if (!m.params.all_finite()) {
        throw DataError("encoder checkpoint: non-finite parameter");
    }
    return m;
}

}  // namespace anx::transformer
