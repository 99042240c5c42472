// Command-line driver for the anx pipeline.
//
//   anx [--config FILE] [--seed N] [--set key=value]... [--out DIR] <command> ...
//
// Exit status: 0 success, 1 usage or configuration error, 2 data error,
// 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "anx/classifier.hpp"
#include "anx/cohort.hpp"
#include "anx/config.hpp"
#include "anx/eval.hpp"
#include "anx/explain.hpp"
#include "anx/features.hpp"
#include "anx/ingest.hpp"
#include "anx/pipeline.hpp"
#include "anx/synth.hpp"

namespace fs = std::filesystem;
using namespace anx;

namespace {

struct Globals {
    std::string config_file;
    std::string seed;
    std::vector<std::string> overrides;
    std::string out_dir{"."};
};

Config resolve_config(const Globals& g) {
    Config c;
    if (!g.config_file.empty()) {
        c.load_text(read_file(g.config_file), g.config_file);
    }
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        c.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (!g.seed.empty()) {
        c.set("seed", g.seed);
    }
    c.unsigned_integer("seed");  // validate early
    return c;
}

std::string out_path(const Globals& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

void wrote(const std::string& path) { std::cout << "wrote " << path << '\n'; }

cohort::CohortConfig cohort_config(const Config& c) {
    cohort::CohortConfig cc;
    cc.anxiety_forum = ingest::normalize_forum(c.str("anxiety_forum"));
    cc.adhd_forum = ingest::normalize_forum(c.str("adhd_forum"));
    cc.window_seconds = c.integer("window_seconds");
    return cc;
}

std::unique_ptr<Classifier> load_model(const std::string& path) { return parse_classifier(read_file(path)); }

// --- subcommands -----------------------------------------------------------

void cmd_ingest(const Globals& g, const Config& c, const std::vector<std::string>& inputs) {
    std::vector<std::string> dumps;
    for (const auto& in : inputs) {
        dumps.push_back(read_file(in));
    }
    const ingest::DateWindow window{c.integer("date_start"), c.integer("date_end")};
    const auto threads = static_cast<unsigned>(std::max<std::uint64_t>(1, c.unsigned_integer("threads")));
    const auto summary = ingest::ingest_dumps(dumps, window, threads);

    std::ostringstream errors;
    errors << "file\tline\treason\n";
    for (const auto& e : summary.parse_errors) {
        errors << inputs[e.dump] << '\t' << e.error.line << '\t' << e.error.reason << '\n';
    }
    const auto posts_file = out_path(g, "posts.ndjson");
    write_file(posts_file, ingest::serialize_posts(summary.posts));
    wrote(posts_file);
    const auto errors_file = out_path(g, "ingest_errors.tsv");
    write_file(errors_file, errors.str());
    wrote(errors_file);
    std::cout << "posts " << summary.posts.size() << ", parse errors " << summary.parse_errors.size()
              << ", removed " << summary.rejected_removed << ", empty " << summary.rejected_empty
              << ", outside window " << summary.outside_window << '\n';
}

void cmd_label(const Globals& g, const Config& c, const std::string& posts_file) {
    const auto posts = ingest::parse_posts(read_file(posts_file));
    const auto result = cohort::label_all(ingest::build_timelines(posts), cohort_config(c));

    std::map<std::string, std::size_t> reasons;
    std::ostringstream excl;
    excl << "author\treason\n";
    for (const auto& e : result.exclusions) {
        excl << e.author << '\t' << e.reason << '\n';
        ++reasons[e.reason];
    }
    std::size_t positives = 0;
    for (const auto& ex : result.examples) {
        positives += ex.y();
    }
    const auto examples_file = out_path(g, "examples.ndjson");
    write_file(examples_file, cohort::serialize_examples(result.examples));
    wrote(examples_file);
    const auto excl_file = out_path(g, "exclusions.tsv");
    write_file(excl_file, excl.str());
    wrote(excl_file);
    std::cout << "examples " << result.examples.size() << " (AnxietyThenAdhd " << positives << ", AnxietyOnly "
              << result.examples.size() - positives << ")";
    for (const auto& [reason, n] : reasons) {
        std::cout << ", excluded " << reason << ' ' << n;
    }
    std::cout << '\n';
}

void cmd_split(const Globals& g, const Config& c, const std::string& examples_file, bool no_balance) {
    const auto examples = cohort::parse_examples(read_file(examples_file));
    const cohort::SplitSpec spec{c.real("test_fraction"), c.unsigned_integer("seed"),
                                 cohort::parse_split_unit(c.str("split_unit"))};
    auto s = cohort::split(examples, spec);
    if (!no_balance) {
        s = cohort::balance_split(s, spec.seed);
    }
    const auto train_file = out_path(g, "train.ndjson");
    write_file(train_file, cohort::serialize_examples(s.train.examples));
    wrote(train_file);
    const auto test_file = out_path(g, "test.ndjson");
    write_file(test_file, cohort::serialize_examples(s.test.examples));
    wrote(test_file);
    const auto manifest_file = out_path(g, "split_manifest.json");
    const auto manifest = cohort::split_manifest(s, spec);
    write_file(manifest_file, manifest);
    wrote(manifest_file);
    std::cout << "train " << s.train.size() << ", test " << s.test.size() << ", manifest "
              << eval::manifest_hash(manifest) << '\n';
}

void cmd_synth(const Globals& g, const Config& c) {
    synth::SynthSpec spec;
    spec.mode = synth::parse_mode(c.str("synth_mode"));
    spec.users_per_class = c.size("synth_users_per_class");
    spec.posts_min = c.size("synth_posts_min");
    spec.posts_max = c.size("synth_posts_max");
    spec.doc_len_min = c.size("synth_len_min");
    spec.doc_len_max = c.size("synth_len_max");
    spec.vocab_pool = c.size("synth_vocab_pool");
    spec.marker_pairs = c.size("synth_marker_pairs");
    spec.cue_tokens = c.size("synth_cue_tokens");
    spec.max_marker_gap = c.size("synth_max_marker_gap");
    spec.signal_strength = c.real("synth_signal_strength");
    spec.seed = c.unsigned_integer("seed");
    spec.forum = c.str("anxiety_forum");
    const auto corpus = synth::generate(spec);
    const auto examples_file = out_path(g, "examples.ndjson");
    write_file(examples_file, cohort::serialize_examples(corpus.examples));
    wrote(examples_file);
    const auto truth_file = out_path(g, "ground_truth.txt");
    write_file(truth_file, corpus.ground_truth);
    wrote(truth_file);

    const cohort::SplitSpec split_spec{c.real("test_fraction"), spec.seed, cohort::SplitUnit::ByUser};
    const auto s = synth::split_by_pair(corpus, split_spec.test_fraction);
    const auto train_file = out_path(g, "train.ndjson");
    write_file(train_file, cohort::serialize_examples(s.train.examples));
    wrote(train_file);
    const auto test_file = out_path(g, "test.ndjson");
    write_file(test_file, cohort::serialize_examples(s.test.examples));
    wrote(test_file);
    const auto manifest_file = out_path(g, "split_manifest.json");
    write_file(manifest_file, cohort::split_manifest(s, split_spec));
    wrote(manifest_file);
    std::cout << "examples " << corpus.examples.size() << ", pair-preserving split: train " << s.train.size()
              << ", test " << s.test.size() << '\n';
}

cohort::TrainSet load_train(const std::string& path) {
    cohort::TrainSet t;
    t.examples = cohort::parse_examples(read_file(path));
    return t;
}

void save_model(const Globals& g, const Classifier& clf, const std::string& name) {
    const auto path = out_path(g, name + ".model");
    write_file(path, clf.serialize());
    wrote(path);
}

void cmd_train(const Globals& g, const Config& c, const std::string& kind_name, const std::string& train_file,
               std::string name) {
    const auto kind = parse_model_kind(kind_name);
    const auto opts = pipeline::options_from_config(c);
    if (name.empty()) {
        name = std::string(model_kind_name(kind));
    }
    std::ostringstream log;
    log << "epoch\tmean_loss\ttrain_accuracy\n";
    const auto clf = pipeline::fit_classifier(kind, load_train(train_file), opts, [&](const transformer::EpochLog& e) {
        log << e.epoch << '\t' << format_double(e.mean_loss) << '\t' << format_double(e.train_accuracy) << '\n';
        std::cout << "epoch " << e.epoch << " loss " << e.mean_loss << " train accuracy " << e.train_accuracy
                  << std::endl;
    });
    save_model(g, *clf, name);
    if (kind == ModelKind::Transformer) {
        const auto log_file = out_path(g, name + "_train_log.tsv");
        write_file(log_file, log.str());
        wrote(log_file);
    }
}

void cmd_grid(const Globals& g, const Config& c, const std::string& kind_name, const std::string& train_file,
              std::string name) {
    const auto kind = parse_model_kind(kind_name);
    if (name.empty()) {
        name = std::string(model_kind_name(kind));
    }
    const auto tuned = pipeline::tune_and_fit(kind, load_train(train_file), pipeline::options_from_config(c));
    const auto table = eval::grid_table_tsv(tuned.grid);
    const auto grid_file = out_path(g, name + "_grid.tsv");
    write_file(grid_file, table);
    wrote(grid_file);
    std::cout << table;
    save_model(g, *tuned.classifier, name);
}

void cmd_evaluate(const Globals& g, const Config& c, const std::string& model_file, const std::string& test_file,
                  std::string id) {
    const auto clf = load_model(model_file);
    if (id.empty()) {
        id = fs::path(model_file).stem().string();
    }
    const auto test = cohort::parse_examples(read_file(test_file));
    const auto r = eval::evaluate(*clf, id, test, c.real("threshold"));
    const auto path = out_path(g, "eval_" + id + ".json");
    write_file(path, r.to_json());
    wrote(path);
    std::cout << id << ": accuracy " << r.accuracy << " on " << r.n_examples << " posts (TP " << r.tp << ", FP "
              << r.fp << ", TN " << r.tn << ", FN " << r.fn << ")\n";
}

void cmd_explain(const Globals& g, const Config& c, const std::string& model_file, const std::string& examples_file,
                 const std::string& post_id, std::size_t max_phrase_len) {
    const auto clf = load_model(model_file);
    const auto examples = cohort::parse_examples(read_file(examples_file));
    const auto it = std::find_if(examples.begin(), examples.end(),
                                 [&](const cohort::LabeledExample& e) { return e.post.id == post_id; });
    if (it == examples.end()) {
        throw DataError("post '" + post_id + "' not found in " + examples_file);
    }
    if (max_phrase_len == 0) {
        max_phrase_len = c.size("max_phrase_len");
    }
    const auto model_id = fs::path(model_file).stem().string();
    const auto report =
        explain::explain(*clf, post_id, model_id, features::tokenize(it->post.text), max_phrase_len);
    const auto rendering = explain::render(report);
    const auto stem = "explain_" + model_id + "_" + post_id;
    const auto html_file = out_path(g, stem + ".html");
    write_file(html_file, rendering.html);
    wrote(html_file);
    const auto tsv_file = out_path(g, stem + ".tsv");
    write_file(tsv_file, rendering.tsv);
    wrote(tsv_file);
}

void cmd_report(const Globals& g, const Config& c, const std::vector<std::string>& results,
                const std::string& manifest_file, const std::string& title) {
    eval::RunContext ctx;
    ctx.title = title;
    ctx.provenance.emplace_back("seed", c.str("seed"));
    ctx.provenance.emplace_back("config hash", eval::manifest_hash(c.dump()));
    if (!manifest_file.empty()) {
        ctx.manifest_hash = eval::manifest_hash(read_file(manifest_file));
    }
    for (const auto& r : results) {
        ctx.results.push_back(eval::EvalResult::from_json(read_file(r)));
    }
    ctx.notes.push_back("Accuracy is computed per post; per-user aggregation is not reported.");
    const auto path = out_path(g, "report.md");
    write_file(path, eval::report(ctx));
    wrote(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anxiety-to-ADHD cohort pipeline: ingest, label, train, evaluate, explain."};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_file, "Flat key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Override the seed key");
    app.add_option("--set", g.overrides, "Override any config key (key=value); repeatable");
    app.add_option("--out", g.out_dir, "Output directory (created if missing)");

    std::vector<std::string> ingest_inputs;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse NDJSON dumps into a clean post store");
    ingest_cmd->add_option("inputs", ingest_inputs, "Dump files")->required()->check(CLI::ExistingFile);

    std::string posts_file;
    auto* label_cmd = app.add_subcommand("label", "Label users from a post store");
    label_cmd->add_option("--posts", posts_file, "Post store from ingest")->required()->check(CLI::ExistingFile);

    std::string examples_file;
    bool no_balance = false;
    auto* split_cmd = app.add_subcommand("split", "Split labeled examples and write a manifest");
    split_cmd->add_option("--examples", examples_file, "Labeled example store")->required()->check(CLI::ExistingFile);
    split_cmd->add_flag("--no-balance", no_balance, "Skip class balancing of each side");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled corpus");

    std::string kind_name, train_file, model_name;
    auto* train_cmd = app.add_subcommand("train", "Train one model on a training store");
    train_cmd->add_option("--model", kind_name, "nb, lr or transformer")->required();
    train_cmd->add_option("--train", train_file, "Training example store")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--name", model_name, "Output model name (default: the kind)");

    auto* grid_cmd = app.add_subcommand("grid", "Grid search a keyword model on a validation split, then refit");
    grid_cmd->add_option("--model", kind_name, "nb or lr")->required();
    grid_cmd->add_option("--train", train_file, "Training example store")->required()->check(CLI::ExistingFile);
    grid_cmd->add_option("--name", model_name, "Output model name (default: the kind)");

    std::string model_file, test_file, result_id;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a model file on a test store");
    eval_cmd->add_option("--model", model_file, "Model file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--test", test_file, "Test example store")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--id", result_id, "Result id (default: model file stem)");

    std::string post_id;
    std::size_t max_phrase_len = 0;
    auto* explain_cmd = app.add_subcommand("explain", "Occlusion attribution for one post");
    explain_cmd->add_option("--model", model_file, "Model file")->required()->check(CLI::ExistingFile);
    explain_cmd->add_option("--examples", examples_file, "Store containing the post")
        ->required()
        ->check(CLI::ExistingFile);
    explain_cmd->add_option("--post-id", post_id, "Post id")->required();
    explain_cmd->add_option("--max-phrase-len", max_phrase_len, "Longest occluded phrase (default: config)");

    std::vector<std::string> result_files;
    std::string manifest_file, title = "Run report";
    auto* report_cmd = app.add_subcommand("report", "Markdown report from evaluation results");
    report_cmd->add_option("--result", result_files, "Evaluation JSON files")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--manifest", manifest_file, "Split manifest to hash")->check(CLI::ExistingFile);
    report_cmd->add_option("--title", title, "Report title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const Config config = resolve_config(g);
        std::cout << "# resolved config\n" << config.dump() << "# end config\n";
        if (*ingest_cmd) {
            cmd_ingest(g, config, ingest_inputs);
        } else if (*label_cmd) {
            cmd_label(g, config, posts_file);
        } else if (*split_cmd) {
            cmd_split(g, config, examples_file, no_balance);
        } else if (*synth_cmd) {
            cmd_synth(g, config);
        } else if (*train_cmd) {
            cmd_train(g, config, kind_name, train_file, model_name);
        } else if (*grid_cmd) {
            cmd_grid(g, config, kind_name, train_file, model_name);
        } else if (*eval_cmd) {
            cmd_evaluate(g, config, model_file, test_file, result_id);
        } else if (*explain_cmd) {
            cmd_explain(g, config, model_file, examples_file, post_id, max_phrase_len);
        } else if (*report_cmd) {
            cmd_report(g, config, result_files, manifest_file, title);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
