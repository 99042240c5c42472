#include "anx/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace anx::explain {

namespace {

std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            case '\'':
                out += "&#39;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// Diverging scale: red toward AnxietyThenAdhd, blue toward AnxietyOnly.
std::string background(double delta, double max_abs) {
    if (max_abs <= 0.0 || delta == 0.0) {
        return "transparent";
    }
    const double a = std::min(1.0, std::fabs(delta) / max_abs);
    const int fade = static_cast<int>(std::lround(255.0 * (1.0 - a)));
    char buf[32];
    if (delta > 0.0) {
        std::snprintf(buf, sizeof(buf), "rgb(255,%d,%d)", fade, fade);
    } else {
        std::snprintf(buf, sizeof(buf), "rgb(%d,%d,255)", fade, fade);
    }
    return buf;
}

std::string join(std::span<const std::string> tokens, TokenSpan span) {
    std::string out;
    for (std::size_t k = 0; k < span.length; ++k) {
        if (k) {
            out += ' ';
        }
        out += tokens[span.start + k];
    }
    return out;
}

}  // namespace

OccludedInput occlude(std::span<const std::string> tokens, TokenSpan span, ModelKind kind,
                      const features::Vocabulary& vocab, std::size_t max_len) {
    if (kind == ModelKind::Transformer) {
        if (span.start > tokens.size() || span.length > tokens.size() - span.start) {
            throw SpanOutOfBoundsError("span outside token bounds");
        }
        auto seq = features::encode(tokens, vocab, max_len);
        const std::size_t visible = seq.ids.size() - 1;
        if (span.start < visible) {
            span.length = std::min(span.length, visible - span.start);
            seq = occlude_sequence(seq, span);
        }
        return seq;
    }
    const auto kept = occlude_tokens(tokens, span);
    return features::vectorize(kept, vocab);
}

double span_delta(const Classifier& model, std::span<const std::string> tokens, TokenSpan span) {
    if (span.length == 0) {
        occlude_tokens(tokens, span);  // bounds check only
        return 0.0;
    }
    return model.score_tokens(tokens) - model.score_tokens(tokens, span);
}

AttributionReport explain(const Classifier& model, std::string post_id, std::string model_id,
                          std::span<const std::string> tokens, std::size_t max_phrase_len) {
    if (tokens.empty()) {
        throw DataError("explain: post has no tokens");
    }
    if (max_phrase_len == 0) {
        throw std::invalid_argument("explain: max phrase length must be at least 1");
    }
    AttributionReport r;
    r.post_id = std::move(post_id);
    r.model_id = std::move(model_id);
    r.max_phrase_len = max_phrase_len;
    r.tokens.assign(tokens.begin(), tokens.end());
    r.base_score = model.score_tokens(tokens);

    for (std::size_t start = 0; start < tokens.size(); ++start) {
        for (std::size_t len = 1; len <= max_phrase_len && start + len <= tokens.size(); ++len) {
            const TokenSpan span{start, len};
            const double delta = r.base_score - model.score_tokens(tokens, span);
            r.span_deltas.push_back({span, delta});
            if (len == 1) {
                r.token_deltas.push_back(delta);
            }
        }
    }
    return r;
}

Rendering render(const AttributionReport& report) {
    if (report.token_deltas.size() != report.tokens.size()) {
        throw std::invalid_argument("render: report inconsistent with its tokens");
    }
    double max_abs = 0.0;
    for (double d : report.token_deltas) {
        max_abs = std::max(max_abs, std::fabs(d));
    }
    for (const auto& s : report.span_deltas) {
        max_abs = std::max(max_abs, std::fabs(s.delta));
    }

    std::ostringstream html;
    html << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
         << "<title>Occlusion attribution " << html_escape(report.post_id) << "</title>\n"
         << "<style>\nbody{font-family:sans-serif;max-width:60em;margin:2em auto;}\n"
         << ".tok{padding:0 2px;margin:1px;border-radius:3px;display:inline-block;}\n"
         << "table{border-collapse:collapse;}td,th{padding:2px 8px;border-bottom:1px solid #ddd;}\n"
         << "</style>\n</head>\n<body>\n";
    html << "<h1>Post " << html_escape(report.post_id) << "</h1>\n";
    html << "<p>Model: " << html_escape(report.model_id) << ". P(AnxietyThenAdhd) = "
         << fixed(report.base_score, 6) << ". Max phrase length " << report.max_phrase_len
         << ". Red pushes toward AnxietyThenAdhd, blue toward AnxietyOnly; scale max |delta| = "
         << fixed(max_abs, 6) << ".</p>\n";
    html << "<h2>Words</h2>\n<p>\n";
    for (std::size_t i = 0; i < report.tokens.size(); ++i) {
        html << "<span class=\"tok\" style=\"background-color:" << background(report.token_deltas[i], max_abs)
             << "\" title=\"" << fixed(report.token_deltas[i], 6) << "\">" << html_escape(report.tokens[i])
             << "</span>\n";
    }
    html << "</p>\n<h2>Phrases</h2>\n<table>\n<tr><th>start</th><th>length</th><th>phrase</th><th>delta</th></tr>\n";
    for (const auto& s : report.span_deltas) {
        html << "<tr><td>" << s.span.start << "</td><td>" << s.span.length << "</td><td style=\"background-color:"
             << background(s.delta, max_abs) << "\">" << html_escape(join(report.tokens, s.span)) << "</td><td>"
             << fixed(s.delta, 6) << "</td></tr>\n";
    }
    html << "</table>\n</body>\n</html>\n";

    std::ostringstream tsv;
    tsv << "kind\tstart\tlength\ttext\tdelta\n";
    for (std::size_t i = 0; i < report.tokens.size(); ++i) {
        tsv << "token\t" << i << "\t1\t" << report.tokens[i] << '\t' << format_double(report.token_deltas[i]) << '\n';
    }
    for (const auto& s : report.span_deltas) {
        tsv << "span\t" << s.span.start << '\t' << s.span.length << '\t' << join(report.tokens, s.span) << '\t'
            << format_double(s.delta) << '\n';
    }
    return {html.str(), tsv.str()};
}

}  // namespace anx::explain
