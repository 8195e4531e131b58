// codeseer: preprocess, train, eval and serve code-completion models.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codeseer/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

constexpr Flag kCommon[] = {
    {"--out", "out", "artifact directory"},
    {"--seed", "seed", "random seed"},
    {"--threads", "threads", "worker threads (0 = all cores)"},
    {"--context-len", "context_len", "context length n"},
};

constexpr Flag kPreprocess[] = {
    {"--corpus", "corpus", "corpus root; each subdirectory is one system"},
    {"--extensions", "extensions", "comma-separated file extensions"},
    {"--min-count", "min_count", "minimum training frequency for a vocabulary entry"},
    {"--test-fraction", "test_fraction", "fraction of files held out for testing"},
};

constexpr Flag kTrain[] = {
    {"--model", "model", "ngram, rnn or bigru"},
    {"--epochs", "epochs", "training epochs"},
    {"--batch", "batch", "mini-batch size"},
    {"--lr", "lr", "Adam learning rate"},
    {"--clip-norm", "clip_norm", "global gradient norm limit"},
    {"--validation-fraction", "validation_fraction", "fraction of training examples used for validation"},
    {"--patience", "patience", "early stopping patience (0 disables)"},
    {"--embed-dim", "embed_dim", "embedding dimension"},
    {"--hidden-dim", "hidden_dim", "hidden state dimension"},
    {"--order", "order", "n-gram order"},
    {"--discount", "discount", "Kneser-Ney discount"},
    {"--checkpoint", "checkpoint", "checkpoint path"},
    {"--vocab", "vocab", "vocabulary path"},
};

constexpr Flag kServe[] = {
    {"--model", "model", "model kind of the default checkpoint"},
    {"--checkpoint", "checkpoint", "checkpoint path"},
    {"--vocab", "vocab", "vocabulary path"},
    {"--bind", "bind", "host:port to listen on"},
    {"--max-k", "max_k", "largest accepted k"},
};

constexpr Flag kEval[] = {
    {"--vocab", "vocab", "vocabulary path"},
};

struct Command {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, std::string>> bound;
    std::vector<std::string> checkpoints;
    std::string config_path;
};

template <std::size_t N>
void add_flags(Command& cmd, const Flag (&flags)[N]) {
    for (const auto& f : flags) cmd.bound.emplace_back(cmd.app->add_option(f.name, cmd.values[f.key], f.help), f.key);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Token-level code completion: n-gram, RNN and bidirectional GRU models"};
    app.require_subcommand(1);

    std::map<std::string, Command> commands;
    const auto make = [&](const std::string& name, const std::string& help) -> Command& {
        auto& cmd = commands[name];
        cmd.app = app.add_subcommand(name, help);
        cmd.app->add_option("--config", cmd.config_path, "key=value configuration file");
        add_flags(cmd, kCommon);
        return cmd;
    };
    add_flags(make("preprocess", "tokenize a corpus and build vocabulary, splits and examples"), kPreprocess);
    add_flags(make("train", "train a model on preprocessed data"), kTrain);
    auto& eval = make("eval", "evaluate checkpoints on the test split");
    add_flags(eval, kEval);
    eval.app->add_option("--checkpoint", eval.checkpoints, "checkpoint to evaluate (repeatable)");
    add_flags(make("serve", "serve suggestions over HTTP"), kServe);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        for (auto& [name, cmd] : commands) {
            if (!cmd.app->parsed()) continue;
            codeseer::RunConfig cfg;
            if (!cmd.config_path.empty()) cfg.apply_file_text(codeseer::read_file(cmd.config_path));
            for (const auto& [opt, key] : cmd.bound) {
                if (opt->count() > 0) cfg.set(key, cmd.values[key]);
            }
            if (!cmd.checkpoints.empty()) {
                std::string joined;
                for (const auto& c : cmd.checkpoints) joined += (joined.empty() ? "" : ",") + c;
                cfg.set("checkpoint", joined);
            }

            if (name == "preprocess") codeseer::cmd_preprocess(cfg, std::cout);
            else if (name == "train") codeseer::cmd_train(cfg, std::cout);
            else if (name == "eval") codeseer::cmd_eval(cfg, std::cout);
            else codeseer::cmd_serve(cfg, std::cout);
        }
    } catch (const codeseer::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const codeseer::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const codeseer::StandardizationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
