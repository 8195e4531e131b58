#ifndef CODESEER_LEXER_HPP
#define CODESEER_LEXER_HPP

// Profile-driven maximal-munch lexer. Comments and blank lines are removed and
// literals collapse to one of four placeholder tokens; there is no grammar
// awareness (`>>` in `List<List<T>>` is a single token).

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "codeseer/error.hpp"

namespace codeseer {

inline constexpr std::string_view kIntPlaceholder = "INT_LIT";
inline constexpr std::string_view kFloatPlaceholder = "FLOAT_LIT";
inline constexpr std::string_view kStringPlaceholder = "STR_LIT";
inline constexpr std::string_view kCharPlaceholder = "CHAR_LIT";

struct LanguageProfile {
    std::string name;
    std::vector<std::string> extensions;
    // Operators bucketed by length; index 0 holds single characters.
    std::array<std::vector<std::string>, 4> operators;
    bool text_blocks = false;  // """ ... """ multi-line strings

    std::size_t longest_operator() const noexcept {
        for (std::size_t n = operators.size(); n > 0; --n) {
            if (!operators[n - 1].empty()) return n;
        }
        return 0;
    }

    bool is_operator(std::string_view candidate) const {
        if (candidate.empty() || candidate.size() > operators.size()) return false;
        const auto& bucket = operators[candidate.size() - 1];
        return std::binary_search(bucket.begin(), bucket.end(), candidate);
    }
};

inline LanguageProfile make_profile(std::string name, std::vector<std::string> extensions,
                                    std::vector<std::string> ops, bool text_blocks) {
    LanguageProfile p;
    p.name = std::move(name);
    p.extensions = std::move(extensions);
    p.text_blocks = text_blocks;
    for (auto& op : ops) {
        if (op.empty() || op.size() > p.operators.size()) {
            throw Error("operator length out of range: '" + op + "'");
        }
        p.operators[op.size() - 1].push_back(std::move(op));
    }
    for (auto& bucket : p.operators) std::sort(bucket.begin(), bucket.end());
    return p;
}

/// The reference profile.
inline const LanguageProfile& java_profile() {
    static const LanguageProfile profile = make_profile(
        "java", {".java"},
        {">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
         ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(", ")", "{", "}", "[",
         "]", ";", ",", ".", "@", "=", ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|",
         "^", "%"},
        true);
    return profile;
}

enum class LexemeKind { identifier, int_literal, float_literal, string_literal, char_literal, op, other };

struct Lexeme {
    LexemeKind kind;
    std::string_view text;
    std::size_t line;  // 1-based line where the lexeme starts
};

/// Characters outside every class of the profile, each emitted as its own token.
struct LexDiagnostics {
    std::map<std::string, std::size_t> unknown_chars;

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& [_, c] : unknown_chars) n += c;
        return n;
    }
    void merge(const LexDiagnostics& other) {
        for (const auto& [ch, c] : other.unknown_chars) unknown_chars[ch] += c;
    }
};

struct StandardizeOptions {
    std::string file_name = "<input>";
    // Close unterminated comments and literals at end of input instead of
    // failing. Editor prefixes routinely stop inside one.
    bool lenient = false;
};

namespace detail {

inline bool is_space(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_hex_digit(unsigned char c) noexcept {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
inline bool is_ident_start(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}
inline bool is_ident_part(unsigned char c) noexcept { return is_ident_start(c) || is_digit(c); }

class Scanner {
public:
    Scanner(std::string_view src, const LanguageProfile& profile, const StandardizeOptions& opts)
        : src_(src), profile_(profile), opts_(opts) {}

    template <class Sink>
    void run(Sink&& sink) {
        while (pos_ < src_.size()) {
            const unsigned char c = peek();
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (is_space(c)) {
                ++pos_;
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '/' && peek(1) == '*') {
                skip_block_comment();
            } else if (c == '"') {
                sink(scan_string());
            } else if (c == '\'') {
                sink(scan_char());
            } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
                sink(scan_number());
            } else if (is_ident_start(c)) {
                const std::size_t start = pos_;
                while (pos_ < src_.size() && is_ident_part(peek())) ++pos_;
                sink(Lexeme{LexemeKind::identifier, src_.substr(start, pos_ - start), line_});
            } else {
                sink(scan_operator());
            }
        }
    }

private:
    unsigned char peek(std::size_t ahead = 0) const noexcept {
        return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : '\0';
    }

    [[noreturn]] void fail(std::size_t line, const std::string& what) const {
        throw StandardizationError(opts_.file_name, line, what);
    }

    void skip_block_comment() {
        const std::size_t start_line = line_;
        pos_ += 2;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '*' && peek(1) == '/') {
                pos_ += 2;
                return;
            }
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
        if (!opts_.lenient) fail(start_line, "unterminated block comment");
    }

    // Consumes a quoted literal body up to `quote`; escapes are skipped verbatim.
    void scan_quoted(char quote, std::size_t start_line, const char* what) {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] != '\n') {
                pos_ += 2;
            } else if (c == quote) {
                ++pos_;
                return;
            } else if (c == '\n') {
                break;
            } else {
                ++pos_;
            }
        }
        if (!opts_.lenient) fail(start_line, std::string("unterminated ") + what);
    }

    Lexeme scan_string() {
        const std::size_t start = pos_;
        const std::size_t start_line = line_;
        if (profile_.text_blocks && src_.substr(pos_, 3) == "\"\"\"") {
            pos_ += 3;
            while (pos_ < src_.size()) {
                if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                    if (src_[pos_ + 1] == '\n') ++line_;
                    pos_ += 2;
                } else if (src_.substr(pos_, 3) == "\"\"\"") {
                    pos_ += 3;
                    return Lexeme{LexemeKind::string_literal, src_.substr(start, pos_ - start), start_line};
                } else {
                    if (src_[pos_] == '\n') ++line_;
                    ++pos_;
                }
            }
            if (!opts_.lenient) fail(start_line, "unterminated text block");
            return Lexeme{LexemeKind::string_literal, src_.substr(start), start_line};
        }
        ++pos_;
        scan_quoted('"', start_line, "string literal");
        return Lexeme{LexemeKind::string_literal, src_.substr(start, pos_ - start), start_line};
    }

    Lexeme scan_char() {
        const std::size_t start = pos_;
        ++pos_;
        scan_quoted('\'', line_, "character literal");
        return Lexeme{LexemeKind::char_literal, src_.substr(start, pos_ - start), line_};
    }

    void skip_digits(bool hex) {
        while (pos_ < src_.size()) {
            const unsigned char c = peek();
            if (c == '_' || (hex ? is_hex_digit(c) : is_digit(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    void skip_exponent(char lower, char upper, bool& floating) {
        if (peek() == lower || peek() == upper) {
            const std::size_t sign = (peek(1) == '+' || peek(1) == '-') ? 1 : 0;
            if (is_digit(peek(1 + sign))) {
                pos_ += 1 + sign;
                skip_digits(false);
                floating = true;
            }
        }
    }

    Lexeme scan_number() {
        const std::size_t start = pos_;
        bool floating = false;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            pos_ += 2;
            skip_digits(true);
            if (peek() == '.') {
                ++pos_;
                skip_digits(true);
                floating = true;
            }
            skip_exponent('p', 'P', floating);
        } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
            pos_ += 2;
            skip_digits(false);
        } else {
            skip_digits(false);
            if (peek() == '.' && !(peek(1) == '.')) {
                ++pos_;
                skip_digits(false);
                floating = true;
            }
            skip_exponent('e', 'E', floating);
            const unsigned char s = peek();
            if (s == 'f' || s == 'F' || s == 'd' || s == 'D') {
                ++pos_;
                floating = true;
            }
        }
        if (!floating && (peek() == 'l' || peek() == 'L')) ++pos_;
        return Lexeme{floating ? LexemeKind::float_literal : LexemeKind::int_literal,
                      src_.substr(start, pos_ - start), line_};
    }

    Lexeme scan_operator() {
        const std::size_t max_len = std::min(profile_.longest_operator(), src_.size() - pos_);
        for (std::size_t len = max_len; len > 0; --len) {
            const auto candidate = src_.substr(pos_, len);
            if (profile_.is_operator(candidate)) {
                pos_ += len;
                return Lexeme{LexemeKind::op, candidate, line_};
            }
        }
        const auto single = src_.substr(pos_, 1);
        ++pos_;
        return Lexeme{LexemeKind::other, single, line_};
    }

    std::string_view src_;
    const LanguageProfile& profile_;
    const StandardizeOptions& opts_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

inline std::string_view surface_text(const Lexeme& lx) noexcept {
    switch (lx.kind) {
        case LexemeKind::int_literal: return kIntPlaceholder;
        case LexemeKind::float_literal: return kFloatPlaceholder;
        case LexemeKind::string_literal: return kStringPlaceholder;
        case LexemeKind::char_literal: return kCharPlaceholder;
        default: return lx.text;
    }
}

}  // namespace detail

/// Removes comments and blank lines and replaces literals with placeholders.
/// The result holds one space-separated token line per surviving source line.
inline std::string standardize(std::string_view content, const LanguageProfile& profile = java_profile(),
                               const StandardizeOptions& opts = {}) {
    std::string out;
    out.reserve(content.size());
    std::size_t current_line = 0;
    bool line_open = false;
    detail::Scanner(content, profile, opts).run([&](const Lexeme& lx) {
        if (line_open && lx.line == current_line) {
            out.push_back(' ');
        } else {
            if (line_open) out.push_back('\n');
            current_line = lx.line;
            line_open = true;
        }
        out.append(detail::surface_text(lx));
    });
    return out;
}

struct TokenStream {
    std::string file_id;
    std::vector<std::string> tokens;
};

/// Splits standardized text into tokens. Never throws on malformed input:
/// any leftover literal still collapses to its placeholder.
inline TokenStream tokenize(std::string_view standardized, const LanguageProfile& profile = java_profile(),
                            LexDiagnostics* diagnostics = nullptr, std::string file_id = {}) {
    TokenStream stream{std::move(file_id), {}};
    StandardizeOptions opts;
    opts.lenient = true;
    detail::Scanner(standardized, profile, opts).run([&](const Lexeme& lx) {
        if (lx.kind == LexemeKind::other && diagnostics) {
            ++diagnostics->unknown_chars[std::string(lx.text)];
        }
        stream.tokens.emplace_back(detail::surface_text(lx));
    });
    return stream;
}

/// Number of non-blank lines, the line-of-code measure used in corpus statistics.
inline std::size_t count_nonblank_lines(std::string_view text) {
    std::size_t lines = 0;
    bool has_content = false;
    for (const char c : text) {
        if (c == '\n') {
            lines += has_content ? 1 : 0;
            has_content = false;
        } else if (!detail::is_space(static_cast<unsigned char>(c))) {
            has_content = true;
        }
    }
    return lines + (has_content ? 1 : 0);
}

}  // namespace codeseer

#endif  // CODESEER_LEXER_HPP
