#ifndef CODESEER_CODEBASE_HPP
#define CODESEER_CODEBASE_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "codeseer/binary_io.hpp"
#include "codeseer/error.hpp"
#include "codeseer/lexer.hpp"
#include "codeseer/parallel.hpp"
#include "codeseer/vocabulary.hpp"

namespace codeseer {

struct SourceFile {
    std::string path;  // relative to the codebase root, '/'-separated
    std::string content;
};

struct SoftwareSystem {
    std::string name;
    std::vector<SourceFile> files;
};

struct Codebase {
    std::vector<SoftwareSystem> systems;
    std::size_t empty_files_dropped = 0;

    std::size_t file_count() const {
        std::size_t n = 0;
        for (const auto& s : systems) n += s.files.size();
        return n;
    }
};

namespace detail {

inline bool has_extension(const std::filesystem::path& p, std::span<const std::string> extensions) {
    const auto ext = p.extension().string();
    return std::find(extensions.begin(), extensions.end(), ext) != extensions.end();
}

inline bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return is_space(static_cast<unsigned char>(c)); });
}

}  // namespace detail

/// Every immediate subdirectory of `root` is one software system; matching
/// files directly under `root` form a system named after the root itself.
/// Traversal order is lexicographic so ingestion is deterministic.
inline Codebase ingest_codebase(const std::filesystem::path& root, std::span<const std::string> extensions) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw DataError("corpus directory '" + root.string() + "' does not exist");

    std::map<std::string, std::vector<fs::path>> by_system;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file() || !detail::has_extension(it->path(), extensions)) continue;
        const auto rel = fs::relative(it->path(), root);
        const auto first = *rel.begin();
        const bool top_level = std::next(rel.begin()) == rel.end();
        const auto system = top_level ? root.filename().string() : first.string();
        by_system[system.empty() ? std::string(".") : system].push_back(rel);
    }

    Codebase cb;
    for (auto& [name, paths] : by_system) {
        std::sort(paths.begin(), paths.end());
        SoftwareSystem sys{name, {}};
        for (const auto& rel : paths) {
            auto content = read_file(root / rel);
            if (detail::is_blank(content)) {
                ++cb.empty_files_dropped;
                continue;
            }
            sys.files.push_back({rel.generic_string(), std::move(content)});
        }
        if (!sys.files.empty()) cb.systems.push_back(std::move(sys));
    }
    return cb;
}

struct ProcessedFile {
    std::string system;
    std::string path;
    std::size_t loc = 0;
    TokenStream stream;
};

struct ProcessedCorpus {
    std::vector<ProcessedFile> files;  // codebase order
    std::vector<std::string> failures;  // "<path>:<line>: <reason>" for files that failed to standardize
    LexDiagnostics diagnostics;
    std::size_t empty_files_dropped = 0;
};

/// Standardizes and tokenizes every file. Files that fail standardization are
/// excluded and reported in `failures`.
inline ProcessedCorpus process_codebase(const Codebase& cb, const LanguageProfile& profile = java_profile(),
                                        std::size_t threads = 1) {
    struct Job {
        const SoftwareSystem* system;
        const SourceFile* file;
    };
    std::vector<Job> jobs;
    for (const auto& sys : cb.systems) {
        for (const auto& f : sys.files) jobs.push_back({&sys, &f});
    }

    std::vector<std::optional<ProcessedFile>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::vector<LexDiagnostics> diags(jobs.size());
    parallel_for(jobs.size(), resolve_threads(threads), [&](std::size_t i) {
        const auto& job = jobs[i];
        try {
            StandardizeOptions opts;
            opts.file_name = job.file->path;
            const auto std_text = standardize(job.file->content, profile, opts);
            ProcessedFile pf{job.system->name, job.file->path, count_nonblank_lines(std_text),
                             tokenize(std_text, profile, &diags[i], job.file->path)};
            results[i] = std::move(pf);
        } catch (const StandardizationError& e) {
            errors[i] = e.what();
        }
    });

    ProcessedCorpus out;
    out.empty_files_dropped = cb.empty_files_dropped;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i]) {
            out.files.push_back(std::move(*results[i]));
            out.diagnostics.merge(diags[i]);
        } else {
            out.failures.push_back(std::move(errors[i]));
        }
    }
    return out;
}

/// Seeded whole-file split. Returns a per-file flag, true for test files.
/// At least one file lands on each side whenever there are two or more files.
inline std::vector<bool> split_files(std::size_t file_count, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DataError("test fraction must lie in (0, 1)");
    std::vector<bool> is_test(file_count, false);
    if (file_count < 2) return is_test;
    std::vector<std::size_t> order(file_count);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates on raw engine output; std::shuffle is implementation-defined.
    std::mt19937_64 rng(seed);
    for (std::size_t i = file_count - 1; i > 0; --i) {
        std::swap(order[i], order[rng() % (i + 1)]);
    }
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(file_count)));
    n_test = std::clamp<std::size_t>(n_test, 1, file_count - 1);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
    return is_test;
}

struct SplitStats {
    std::size_t files = 0;
    std::size_t loc = 0;
    std::size_t tokens = 0;
    std::size_t examples = 0;
    std::size_t unk_tokens = 0;
};

struct CorpusStats {
    std::size_t systems = 0;
    std::size_t files = 0;
    std::size_t empty_files_dropped = 0;
    std::size_t failed_files = 0;
    std::size_t loc = 0;
    std::size_t total_tokens = 0;
    std::size_t vocab_size = 0;
    std::size_t singleton_count = 0;  // distinct training tokens below min_count
    std::size_t unknown_chars = 0;
    std::size_t context_len = 0;
    SplitStats train;
    SplitStats test;

    /// `key: value` lines.
    std::string to_report() const {
        std::string out;
        const auto line = [&](std::string_view key, std::size_t v) {
            out.append(key);
            out += ": ";
            out += std::to_string(v);
            out += '\n';
        };
        line("systems", systems);
        line("files", files);
        line("empty_files_dropped", empty_files_dropped);
        line("failed_files", failed_files);
        line("loc", loc);
        line("total_tokens", total_tokens);
        line("vocab_size", vocab_size);
        line("singleton_count", singleton_count);
        line("unknown_chars", unknown_chars);
        line("context_len", context_len);
        for (const auto& [name, s] : {std::pair<std::string_view, const SplitStats&>{"train", train}, {"test", test}}) {
            const std::string p(name);
            line(p + "_files", s.files);
            line(p + "_loc", s.loc);
            line(p + "_tokens", s.tokens);
            line(p + "_examples", s.examples);
            line(p + "_unk_tokens", s.unk_tokens);
        }
        return out;
    }
};

/// Parses a `key: value` report into a map.
inline std::map<std::string, std::string> parse_key_values(std::string_view text, char sep = ':') {
    std::map<std::string, std::string> kv;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        const auto at = line.find(sep);
        if (at == std::string_view::npos) continue;
        auto trim = [](std::string_view s) {
            while (!s.empty() && detail::is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
            while (!s.empty() && detail::is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
            return s;
        };
        kv[std::string(trim(line.substr(0, at)))] = std::string(trim(line.substr(at + 1)));
    }
    return kv;
}

inline CorpusStats corpus_stats(const ProcessedCorpus& corpus, const std::vector<bool>& is_test, const Vocabulary& vocab,
                                const FrequencyMap& train_counts, std::size_t min_count, std::size_t context_len) {
    CorpusStats st;
    std::set<std::string> systems;
    st.files = corpus.files.size();
    st.empty_files_dropped = corpus.empty_files_dropped;
    st.failed_files = corpus.failures.size();
    st.unknown_chars = corpus.diagnostics.total();
    st.vocab_size = vocab.size();
    st.context_len = context_len;
    for (const auto& [_, freq] : train_counts) st.singleton_count += freq < min_count ? 1 : 0;
    for (std::size_t i = 0; i < corpus.files.size(); ++i) {
        const auto& f = corpus.files[i];
        systems.insert(f.system);
        auto& s = is_test[i] ? st.test : st.train;
        ++s.files;
        s.loc += f.loc;
        s.tokens += f.stream.tokens.size();
        s.examples += f.stream.tokens.empty() ? 0 : f.stream.tokens.size() - 1;
        for (const auto& t : f.stream.tokens) s.unk_tokens += vocab.id(t) == kUnkId ? 1 : 0;
    }
    st.systems = systems.size();
    st.loc = st.train.loc + st.test.loc;
    st.total_tokens = st.train.tokens + st.test.tokens;
    return st;
}

}  // namespace codeseer

#endif  // CODESEER_CODEBASE_HPP
