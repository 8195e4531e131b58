#ifndef CODESEER_PIPELINE_HPP
#define CODESEER_PIPELINE_HPP

// Offline pipeline behind the `codeseer` command: preprocess -> train -> eval,
// plus serve. Every command reads and writes one artifact directory.
//
// Artifact directory layout:
//   vocab.tsv                  id, token, frequency
//   train.csex / test.csex     context examples
//   train.ids / test.ids       vectorized token streams (n-gram training)
//   manifest.tsv               split, system, path, tokens, loc per file
//   stats.txt                  corpus statistics
//   <model>.ckpt               trained model
//   <model>.metrics.tsv        per-epoch curves (neural models)
//   eval_report.tsv            comparison table
//   config.<command>.txt       resolved configuration of each run

#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "codeseer/codebase.hpp"
#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/eval.hpp"
#include "codeseer/neural/checkpoint.hpp"
#include "codeseer/neural/trainer.hpp"
#include "codeseer/ngram.hpp"
#include "codeseer/server.hpp"
#include "codeseer/vocabulary.hpp"

namespace codeseer {

/// Resolved configuration. Precedence: defaults, then config file, then flags.
struct RunConfig {
    std::map<std::string, std::string> values{
        {"corpus", ""},
        {"out", "codeseer-out"},
        {"model", "bigru"},
        {"context_len", "20"},
        {"extensions", ".java"},
        {"min_count", "2"},
        {"test_fraction", "0.1"},
        {"seed", "1"},
        {"threads", "0"},
        {"epochs", "10"},
        {"batch", "64"},
        {"lr", "0.001"},
        {"clip_norm", "5"},
        {"validation_fraction", "0.1"},
        {"patience", "0"},
        {"embed_dim", "64"},
        {"hidden_dim", "128"},
        {"order", "3"},
        {"discount", "0.75"},
        {"checkpoint", ""},
        {"vocab", ""},
        {"bind", "127.0.0.1:8321"},
        {"max_k", "100"},
    };

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = [] {
            std::set<std::string> k;
            for (const auto& [key, _] : RunConfig{}.values) k.insert(key);
            return k;
        }();
        return keys;
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().contains(key)) throw DataError("unknown configuration key '" + key + "'");
        values[key] = value;
    }

    const std::string& get(const std::string& key) const { return values.at(key); }

    std::size_t get_size(const std::string& key) const {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(get(key), &used);
            if (used != get(key).size()) throw std::invalid_argument(key);
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw DataError("configuration key '" + key + "' must be a non-negative integer, got '" + get(key) + "'");
        }
    }

    double get_double(const std::string& key) const {
        try {
            std::size_t used = 0;
            const auto v = std::stod(get(key), &used);
            if (used != get(key).size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw DataError("configuration key '" + key + "' must be a number, got '" + get(key) + "'");
        }
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(get(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    std::filesystem::path out_dir() const { return get("out"); }

    /// Flat `key=value` lines; `#` starts a comment.
    void apply_file_text(std::string_view text) {
        for (const auto& [k, v] : parse_key_values(strip_comments(text), '=')) set(k, v);
    }

    std::string to_text() const {
        std::string out;
        for (const auto& [k, v] : values) out += k + "=" + v + "\n";
        return out;
    }

private:
    static std::string strip_comments(std::string_view text) {
        std::string out;
        std::stringstream ss{std::string(text)};
        std::string line;
        while (std::getline(ss, line)) {
            const auto hash = line.find('#');
            out += line.substr(0, hash) + "\n";
        }
        return out;
    }
};

namespace artifacts {
inline constexpr std::string_view kVocab = "vocab.tsv";
inline constexpr std::string_view kTrainExamples = "train.csex";
inline constexpr std::string_view kTestExamples = "test.csex";
inline constexpr std::string_view kTrainStreams = "train.ids";
inline constexpr std::string_view kTestStreams = "test.ids";
inline constexpr std::string_view kManifest = "manifest.tsv";
inline constexpr std::string_view kStats = "stats.txt";
inline constexpr std::string_view kEvalReport = "eval_report.tsv";
}  // namespace artifacts

inline void write_config(const RunConfig& cfg, const std::string& command) {
    write_file(cfg.out_dir() / ("config." + command + ".txt"), cfg.to_text());
}

struct PreprocessResult {
    CorpusStats stats;
    std::vector<std::string> failures;
};

inline PreprocessResult cmd_preprocess(const RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    const auto corpus = cfg.get("corpus");
    if (corpus.empty()) throw DataError("--corpus is required");
    const auto exts = cfg.get_list("extensions");
    const auto n = cfg.get_size("context_len");
    const auto min_count = cfg.get_size("min_count");
    if (n < 1) throw DataError("context length must be at least 1");

    const auto cb = ingest_codebase(corpus, exts);
    if (cb.file_count() == 0) throw DataError("no matching source files under '" + corpus + "'");
    auto processed = process_codebase(cb, java_profile(), cfg.get_size("threads"));
    for (const auto& f : processed.failures) log << "warning: skipped " << f << "\n";
    if (processed.files.empty()) throw DataError("every source file failed standardization");

    const auto is_test =
        split_files(processed.files.size(), cfg.get_double("test_fraction"), static_cast<std::uint64_t>(cfg.get_size("seed")));
    FrequencyMap train_counts;
    for (std::size_t i = 0; i < processed.files.size(); ++i) {
        if (!is_test[i]) count_tokens(processed.files[i].stream, train_counts);
    }
    const auto vocab = build_vocabulary(train_counts, min_count);

    ExampleSet train_examples(n), test_examples(n);
    IdStreams train_streams, test_streams;
    std::string manifest = "split\tsystem\tpath\ttokens\tloc\n";
    for (std::size_t i = 0; i < processed.files.size(); ++i) {
        const auto& f = processed.files[i];
        auto ids = vectorize(f.stream, vocab);
        extract_contexts(ids, is_test[i] ? test_examples : train_examples);
        (is_test[i] ? test_streams : train_streams).push_back(std::move(ids));
        manifest += std::string(is_test[i] ? "test" : "train") + "\t" + f.system + "\t" + f.path + "\t" +
                    std::to_string(f.stream.tokens.size()) + "\t" + std::to_string(f.loc) + "\n";
    }

    const auto out = cfg.out_dir();
    fs::create_directories(out);
    auto stats = corpus_stats(processed, is_test, vocab, train_counts, min_count, n);
    write_file(out / artifacts::kVocab, vocab.serialize());
    write_file(out / artifacts::kTrainExamples, serialize_examples(train_examples));
    write_file(out / artifacts::kTestExamples, serialize_examples(test_examples));
    write_file(out / artifacts::kTrainStreams, serialize_streams(train_streams));
    write_file(out / artifacts::kTestStreams, serialize_streams(test_streams));
    write_file(out / artifacts::kManifest, manifest);
    write_file(out / artifacts::kStats, stats.to_report());
    write_config(cfg, "preprocess");
    log << "preprocessed " << stats.files << " files (" << stats.total_tokens << " tokens, vocabulary " << stats.vocab_size
        << "): " << train_examples.size() << " train / " << test_examples.size() << " test examples\n";
    return {stats, processed.failures};
}

inline std::filesystem::path default_checkpoint(const RunConfig& cfg) {
    const auto& c = cfg.get("checkpoint");
    if (!c.empty() && c.find(',') == std::string::npos) return c;
    return cfg.out_dir() / (cfg.get("model") + ".ckpt");
}

inline Vocabulary load_vocabulary(const RunConfig& cfg) {
    const auto& v = cfg.get("vocab");
    return Vocabulary::parse(read_file(v.empty() ? cfg.out_dir() / artifacts::kVocab : std::filesystem::path(v)));
}

struct TrainSummary {
    std::string kind;
    std::filesystem::path checkpoint;
    std::size_t epochs_completed = 0;
    bool diverged = false;
};

inline TrainSummary cmd_train(const RunConfig& cfg, std::ostream& log) {
    const auto kind = cfg.get("model");
    const auto out = cfg.out_dir();
    const auto vocab = load_vocabulary(cfg);
    const auto ckpt_path = default_checkpoint(cfg);
    TrainSummary summary{kind, ckpt_path, 0, false};

    if (kind == "ngram") {
        const auto streams = parse_streams(read_file(out / artifacts::kTrainStreams));
        for (const auto& s : streams) {
            for (const auto id : s) {
                if (id >= vocab.size()) throw DataError("training streams do not match the vocabulary");
            }
        }
        const auto model = NGramModel::train(streams, vocab.size(), cfg.get_size("order"), cfg.get_double("discount"));
        write_file(ckpt_path, model.serialize(vocab.hash()));
        write_config(cfg, "train.ngram");
        log << "trained order-" << model.order() << " n-gram model -> " << ckpt_path.string() << "\n";
        return summary;
    }

    const auto model_kind = neural::parse_model_kind(kind);
    const auto examples = parse_examples(read_file(out / artifacts::kTrainExamples));
    if (!examples.empty() && examples.max_id() >= vocab.size()) {
        throw DataError("training examples do not match the vocabulary");
    }
    neural::TrainConfig tc;
    tc.epochs = cfg.get_size("epochs");
    tc.batch_size = cfg.get_size("batch");
    tc.learning_rate = cfg.get_double("lr");
    tc.gradient_clip_norm = cfg.get_double("clip_norm");
    tc.seed = cfg.get_size("seed");
    tc.validation_fraction = cfg.get_double("validation_fraction");
    tc.threads = cfg.get_size("threads");
    tc.patience = cfg.get_size("patience");
    neural::ModelDims dims;
    dims.embed_dim = cfg.get_size("embed_dim");
    dims.hidden_dim = cfg.get_size("hidden_dim");

    std::string metrics = "epoch\ttrain_loss\tval_loss\ttrain_acc\tval_acc\n";
    auto result = neural::train(examples, vocab, model_kind, dims, tc, [&](const neural::EpochMetrics& m, double sec) {
        log << kind << " epoch " << m.epoch << ": train " << format_fixed(m.train_loss_bits, 4) << " bits / "
            << format_fixed(m.train_acc * 100, 2) << "%, val " << format_fixed(m.val_loss_bits, 4) << " bits / "
            << format_fixed(m.val_acc * 100, 2) << "% (" << format_fixed(sec, 1) << " s)" << std::endl;
    });
    for (const auto& m : result.history) {
        metrics += std::to_string(m.epoch) + "\t" + neural::format_double(m.train_loss_bits) + "\t" +
                   neural::format_double(m.val_loss_bits) + "\t" + neural::format_double(m.train_acc) + "\t" +
                   neural::format_double(m.val_acc) + "\n";
    }
    neural::save_checkpoint(result.checkpoint, ckpt_path);
    write_file(out / (kind + ".metrics.tsv"), metrics);
    write_config(cfg, "train." + kind);
    summary.epochs_completed = result.history.size();
    summary.diverged = result.diverged;
    if (result.diverged) {
        throw Error("training diverged (" + result.divergence_reason + "); best checkpoint from epoch " +
                    std::to_string(result.best_epoch) + " saved to " + ckpt_path.string());
    }
    log << "best epoch " << result.best_epoch << " -> " << ckpt_path.string() << "\n";
    return summary;
}

/// Refuses manifests listing a file in both splits.
inline void check_manifest(std::string_view manifest) {
    std::map<std::string, std::string> seen;
    std::size_t line_no = 0;
    std::stringstream ss{std::string(manifest)};
    std::string line;
    while (std::getline(ss, line)) {
        if (++line_no == 1 || line.empty()) continue;
        std::stringstream fields(line);
        std::string split, system, path;
        std::getline(fields, split, '\t');
        std::getline(fields, system, '\t');
        std::getline(fields, path, '\t');
        if (split != "train" && split != "test") throw DataError("manifest line " + std::to_string(line_no) + ": bad split");
        const auto [it, inserted] = seen.emplace(path, split);
        if (!inserted && it->second != split) throw DataError("train/test overlap in manifest: '" + path + "'");
    }
}

inline std::vector<EvalReport> cmd_eval(const RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    const auto out = cfg.out_dir();
    check_manifest(read_file(out / artifacts::kManifest));
    const auto vocab = load_vocabulary(cfg);
    const auto test = parse_examples(read_file(out / artifacts::kTestExamples));

    std::vector<fs::path> checkpoints;
    for (const auto& c : cfg.get_list("checkpoint")) checkpoints.emplace_back(c);
    if (checkpoints.empty()) {
        for (const auto* kind : {"ngram", "rnn", "bigru"}) {
            const auto p = out / (std::string(kind) + ".ckpt");
            if (fs::exists(p)) checkpoints.push_back(p);
        }
    }
    if (checkpoints.empty()) throw DataError("no checkpoints to evaluate in '" + out.string() + "'");

    std::vector<EvalReport> reports;
    for (const auto& path : checkpoints) {
        const auto served = load_served_model(path, vocab);
        auto report = std::visit(
            [&](const auto& m) {
                if constexpr (requires { typename std::decay_t<decltype(m)>::NeuralTag; }) {
                    if (m.context_len() != test.context_len()) {
                        throw DataError(path.string() + ": context length does not match the test examples");
                    }
                }
                return evaluate(m, test, served.kind, kDefaultKs, cfg.get_size("threads"));
            },
            served.model);
        log << "evaluated " << served.kind << " on " << report.example_count << " examples in "
            << format_fixed(report.wall_seconds, 1) << " s\n";
        reports.push_back(std::move(report));
    }
    write_file(out / artifacts::kEvalReport, reports_to_tsv(reports));
    write_config(cfg, "eval");
    log << reports_to_table(reports);
    return reports;
}

inline void cmd_serve(const RunConfig& cfg, std::ostream& log) {
    const auto& v = cfg.get("vocab");
    serve(default_checkpoint(cfg), v.empty() ? cfg.out_dir() / artifacts::kVocab : std::filesystem::path(v),
          parse_bind(cfg.get("bind")), cfg.get_size("max_k"), &log);
}

}  // namespace codeseer

#endif  // CODESEER_PIPELINE_HPP
