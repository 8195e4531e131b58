#ifndef CODESEER_SERVER_HPP
#define CODESEER_SERVER_HPP

// Suggestion service. One immutable model per process; every request works
// on its own scratch buffers, so handlers run concurrently without locking.
//
//   POST /v1/suggest   {"context": [tok...], "k": 10} | {"raw_code": "...", "k": 10}
//   GET  /v1/health
//   POST /v1/tokenize  {"raw_code": "..."}

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "codeseer/binary_io.hpp"
#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/lexer.hpp"
#include "codeseer/neural/checkpoint.hpp"
#include "codeseer/ngram.hpp"
#include "codeseer/ranking.hpp"
#include "codeseer/vocabulary.hpp"

#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>
#include <json.hpp>

namespace codeseer {

inline constexpr std::string_view kUnkDisplay = "⟨unk⟩";
inline constexpr std::size_t kHardMaxK = 1000;

using AnyModel = std::variant<NGramModel, neural::SequenceModel<float>>;

struct ServedModel {
    AnyModel model;
    Vocabulary vocab;
    std::string kind;         // "ngram", "rnn" or "bigru"
    std::size_t context_len;  // ids fed to the model per request
};

/// Loads a neural (CSNN) or n-gram (CSNG) checkpoint and verifies it was
/// trained against `vocab`.
inline ServedModel load_served_model(const std::filesystem::path& checkpoint, Vocabulary vocab) {
    const auto bytes = read_file(checkpoint);
    const auto hash = vocab.hash();
    const auto check = [&](const Digest& got, std::size_t model_vocab) {
        if (got != hash) {
            throw FormatError(checkpoint.string() + ": vocabulary hash mismatch (checkpoint " + to_hex(got) +
                              ", vocabulary " + to_hex(hash) + ")");
        }
        if (model_vocab != vocab.size()) throw FormatError(checkpoint.string() + ": vocabulary size mismatch");
    };
    if (bytes.starts_with(NGramModel::kMagic)) {
        auto loaded = NGramModel::parse(bytes, checkpoint.string());
        check(loaded.vocab_hash, loaded.model.vocab_size());
        const auto n = std::max<std::size_t>(1, loaded.model.order() - 1);
        return {std::move(loaded.model), std::move(vocab), "ngram", n};
    }
    auto ckpt = neural::parse_checkpoint(bytes, checkpoint.string());
    check(ckpt.vocab_hash, ckpt.model.vocab_size());
    const auto n = ckpt.model.context_len();
    std::string kind(neural::to_string(ckpt.model.kind));
    return {std::move(ckpt.model), std::move(vocab), std::move(kind), n};
}

inline ServedModel load_served_model(const std::filesystem::path& checkpoint, const std::filesystem::path& vocab_path) {
    return load_served_model(checkpoint, Vocabulary::parse(read_file(vocab_path)));
}

struct SuggestRequest {
    std::vector<std::string> context;  // oldest first; may be empty
    std::size_t k = 10;
    std::string client_id;
};

struct RenderedSuggestion {
    std::string token;
    double probability;
    std::size_t rank;  // 1-based
};

struct SuggestionResponse {
    std::vector<RenderedSuggestion> suggestions;
    std::string model_kind;
    double latency_ms = 0;
};

/// Protocol-level failure, mapped to an HTTP 4xx status.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what, int status = 400) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class SuggestionService {
public:
    explicit SuggestionService(ServedModel served, std::size_t max_k = 100, const LanguageProfile& profile = java_profile())
        : served_(std::move(served)), max_k_(max_k), profile_(profile) {
        if (max_k_ < 1 || max_k_ > kHardMaxK) throw DataError("max-k must lie in [1, 1000]");
    }

    const ServedModel& model() const noexcept { return served_; }
    std::size_t max_k() const noexcept { return max_k_; }

    nlohmann::json health() const {
        return {{"status", "ok"},
                {"model_kind", served_.kind},
                {"vocab_size", served_.vocab.size()},
                {"context_len", served_.context_len}};
    }

    /// Same lexing as training, tolerant of a prefix that ends mid-comment or
    /// mid-literal.
    std::vector<std::string> tokenize_raw(std::string_view raw_code) const {
        StandardizeOptions opts;
        opts.file_name = "<request>";
        opts.lenient = true;
        return tokenize(standardize(raw_code, profile_, opts), profile_).tokens;
    }

    SuggestionResponse handle_suggest(const SuggestRequest& req) const {
        if (req.k < 1 || req.k > max_k_) {
            throw ProtocolError("k must lie in [1, " + std::to_string(max_k_) + "]");
        }
        std::vector<TokenId> ids;
        ids.reserve(req.context.size());
        for (const auto& t : req.context) ids.push_back(served_.vocab.id(t));
        const auto context = fit_context(ids, served_.context_len);

        const auto t0 = std::chrono::steady_clock::now();
        // one extra slot absorbs a filtered PAD
        const std::size_t want = std::min(req.k + 1, served_.vocab.size());
        const auto ranked = std::visit([&](const auto& m) { return codeseer::predict_topk(m, context, want); }, served_.model);
        const auto t1 = std::chrono::steady_clock::now();

        SuggestionResponse resp;
        resp.model_kind = served_.kind;
        resp.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        std::optional<Suggestion> unk;
        for (const auto& s : ranked) {
            if (s.id == kPadId) continue;
            if (resp.suggestions.size() + (unk ? 1 : 0) >= req.k) break;
            if (s.id == kUnkId) {
                unk = s;
                continue;
            }
            resp.suggestions.push_back({served_.vocab.token(s.id), s.probability, 0});
        }
        if (unk) resp.suggestions.push_back({std::string(kUnkDisplay), unk->probability, 0});
        for (std::size_t i = 0; i < resp.suggestions.size(); ++i) resp.suggestions[i].rank = i + 1;
        return resp;
    }

    static nlohmann::json to_json(const SuggestionResponse& r) {
        auto list = nlohmann::json::array();
        for (const auto& s : r.suggestions) {
            list.push_back({{"token", s.token}, {"probability", s.probability}, {"rank", s.rank}});
        }
        return {{"suggestions", std::move(list)}, {"model_kind", r.model_kind}, {"latency_ms", r.latency_ms}};
    }

    SuggestRequest parse_suggest(std::string_view body) const {
        const auto j = parse_object(body);
        SuggestRequest req;
        const bool has_context = j.contains("context");
        const bool has_raw = j.contains("raw_code");
        if (has_context == has_raw) throw ProtocolError("exactly one of 'context' or 'raw_code' is required");
        if (has_context) {
            const auto& c = j.at("context");
            if (!c.is_array()) throw ProtocolError("'context' must be an array of strings");
            for (const auto& t : c) {
                if (!t.is_string()) throw ProtocolError("'context' must be an array of strings");
                req.context.push_back(t.get<std::string>());
            }
        } else {
            const auto& raw = j.at("raw_code");
            if (!raw.is_string()) throw ProtocolError("'raw_code' must be a string");
            req.context = tokenize_raw(raw.get_ref<const std::string&>());
        }
        if (j.contains("k")) {
            const auto& k = j.at("k");
            if (!k.is_number_integer()) throw ProtocolError("'k' must be an integer");
            const auto kv = k.get<std::int64_t>();
            if (kv < 1 || static_cast<std::uint64_t>(kv) > max_k_) {
                throw ProtocolError("k must lie in [1, " + std::to_string(max_k_) + "]");
            }
            req.k = static_cast<std::size_t>(kv);
        }
        if (j.contains("client_id")) {
            if (!j.at("client_id").is_string()) throw ProtocolError("'client_id' must be a string");
            req.client_id = j.at("client_id").get<std::string>();
        }
        return req;
    }

    struct Reply {
        int status;
        nlohmann::json body;
    };

    Reply suggest(std::string_view body) const {
        return guarded([&] { return to_json(handle_suggest(parse_suggest(body))); });
    }

    Reply tokenize_request(std::string_view body) const {
        return guarded([&] {
            const auto j = parse_object(body);
            if (!j.contains("raw_code") || !j.at("raw_code").is_string()) {
                throw ProtocolError("'raw_code' string is required");
            }
            return nlohmann::json{{"tokens", tokenize_raw(j.at("raw_code").get_ref<const std::string&>())}};
        });
    }

private:
    static nlohmann::json parse_object(std::string_view body) {
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded()) throw ProtocolError("request body is not valid JSON");
        if (!j.is_object()) throw ProtocolError("request body must be a JSON object");
        return j;
    }

    template <class F>
    static Reply guarded(F&& f) {
        try {
            return {200, f()};
        } catch (const ProtocolError& e) {
            return {e.status(), {{"error", e.what()}}};
        }
    }

    ServedModel served_;
    std::size_t max_k_;
    const LanguageProfile& profile_;
};

struct BindAddress {
    std::string host = "127.0.0.1";
    int port = 8321;
};

inline BindAddress parse_bind(std::string_view s) {
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos) throw DataError("bind address must be host:port");
    BindAddress b;
    b.host = std::string(s.substr(0, colon));
    try {
        std::size_t used = 0;
        const auto port_text = std::string(s.substr(colon + 1));
        b.port = std::stoi(port_text, &used);
        if (used != port_text.size() || b.port < 0 || b.port > 65535) throw std::invalid_argument("port");
    } catch (const std::exception&) {
        throw DataError("invalid port in bind address '" + std::string(s) + "'");
    }
    return b;
}

/// HTTP front end. The listening socket is opened only after the model has
/// been loaded, so clients never observe a half-ready service.
class SuggestionServer {
public:
    explicit SuggestionServer(std::shared_ptr<const SuggestionService> service)
        : service_(std::move(service)), http_(std::make_unique<httplib::Server>()) {
        // exclusive bind: a second server on the same port must fail
        http_->set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        http_->set_keep_alive_timeout(1);
        const auto reply = [](httplib::Response& res, const SuggestionService::Reply& r) {
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        http_->Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
            reply(res, {200, service_->health()});
        });
        http_->Post("/v1/suggest", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service_->suggest(req.body));
        });
        http_->Post("/v1/tokenize", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service_->tokenize_request(req.body));
        });
    }

    ~SuggestionServer() { stop(); }

    SuggestionServer(const SuggestionServer&) = delete;
    SuggestionServer& operator=(const SuggestionServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Returns the bound port.
    int bind(const BindAddress& addr) {
        const int port = addr.port == 0 ? http_->bind_to_any_port(addr.host) : (http_->bind_to_port(addr.host, addr.port) ? addr.port : -1);
        if (port < 0) throw Error("cannot bind " + addr.host + ":" + std::to_string(addr.port));
        port_ = port;
        return port;
    }

    /// Blocks until stop().
    void listen() { http_->listen_after_bind(); }

    /// Runs the accept loop on a background thread.
    void start() {
        worker_ = std::thread([this] { listen(); });
        http_->wait_until_ready();
    }

    void stop() {
        // httplib only releases the socket of a running server
        if (port_ >= 0 && !worker_.joinable()) start();
        if (http_->is_running()) http_->stop();
        if (worker_.joinable()) worker_.join();
        port_ = -1;
    }

    int port() const noexcept { return port_; }

private:
    std::shared_ptr<const SuggestionService> service_;
    std::unique_ptr<httplib::Server> http_;
    std::thread worker_;
    int port_ = -1;
};

namespace detail {
inline std::atomic<bool>& shutdown_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}
extern "C" inline void handle_shutdown_signal(int) { shutdown_flag().store(true); }
}  // namespace detail

/// Loads the model, binds, and serves until SIGINT/SIGTERM. In-flight
/// requests finish before return.
inline void serve(const std::filesystem::path& checkpoint, const std::filesystem::path& vocab_path,
                  const BindAddress& addr, std::size_t max_k = 100, std::ostream* log = nullptr) {
    auto service = std::make_shared<const SuggestionService>(load_served_model(checkpoint, vocab_path), max_k);
    SuggestionServer server(service);
    const int port = server.bind(addr);
    if (log) {
        *log << "serving " << service->model().kind << " model (vocab " << service->model().vocab.size() << ") on "
             << addr.host << ":" << port << std::endl;
    }
    detail::shutdown_flag().store(false);
    std::signal(SIGINT, detail::handle_shutdown_signal);
    std::signal(SIGTERM, detail::handle_shutdown_signal);
    server.start();
    while (!detail::shutdown_flag().load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
}

}  // namespace codeseer

#endif  // CODESEER_SERVER_HPP
