#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "panelfair/config.hpp"
#include "panelfair/errors.hpp"

namespace panelfair {

namespace {

class TomlReader {
public:
    explicit TomlReader(const std::string& text) : text_(text) {}

    Json parse() {
        Json root = Json::object();
        Json* table = &root;
        for (;;) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                table = parse_header(root);
            } else {
                std::vector<std::string> key = parse_key();
                skip_inline_space();
                expect('=');
                skip_inline_space();
                Json value = parse_value();
                assign(*table, key, std::move(value));
            }
            end_of_line();
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("TOML line " + std::to_string(line_) + ": " + what);
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }
    char get() {
        const char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) get();
    }
    void skip_comment() {
        if (peek() == '#') {
            while (!eof() && peek() != '\n') get();
        }
    }
    void skip_blank_lines() {
        for (;;) {
            skip_inline_space();
            skip_comment();
            if (eof()) return;
            if (peek() == '\n' || peek() == '\r') {
                get();
                continue;
            }
            return;
        }
    }
    // Whitespace, newlines and comments inside arrays.
    void skip_array_space() {
        for (;;) {
            skip_inline_space();
            skip_comment();
            if (!eof() && (peek() == '\n' || peek() == '\r')) {
                get();
                continue;
            }
            return;
        }
    }
    void end_of_line() {
        skip_inline_space();
        skip_comment();
        if (eof()) return;
        if (peek() == '\r') get();
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        get();
    }

    static bool bare_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
    }

    std::vector<std::string> parse_key() {
        std::vector<std::string> parts;
        for (;;) {
            skip_inline_space();
            if (peek() == '"') {
                parts.push_back(parse_basic_string());
            } else if (peek() == '\'') {
                parts.push_back(parse_literal_string());
            } else {
                std::string part;
                while (!eof() && bare_key_char(peek())) part += get();
                if (part.empty()) fail("expected a key");
                parts.push_back(part);
            }
            skip_inline_space();
            if (peek() != '.') return parts;
            get();
        }
    }

    Json* parse_header(Json& root) {
        get();
        const bool array_table = peek() == '[';
        if (array_table) get();
        const std::vector<std::string> key = parse_key();
        expect(']');
        if (array_table) expect(']');

        Json* node = &root;
        for (std::size_t i = 0; i + 1 < key.size(); ++i) node = &descend(*node, key[i]);
        Json& last = (*node)[key.back()];
        if (array_table) {
            if (last.is_null()) last = Json::array();
            if (!last.is_array()) fail("key '" + key.back() + "' is not an array of tables");
            last.push_back(Json::object());
            return &last.back();
        }
        if (last.is_null()) last = Json::object();
        if (!last.is_object()) fail("key '" + key.back() + "' is not a table");
        return &last;
    }

    // Walks into a table, or into the latest element of an array of tables.
    Json& descend(Json& node, const std::string& key) {
        Json& child = node[key];
        if (child.is_null()) child = Json::object();
        if (child.is_array() && !child.empty() && child.back().is_object()) return child.back();
        if (!child.is_object()) fail("key '" + key + "' is not a table");
        return child;
    }

    void assign(Json& table, const std::vector<std::string>& key, Json value) {
        Json* node = &table;
        for (std::size_t i = 0; i + 1 < key.size(); ++i) node = &descend(*node, key[i]);
        if (node->contains(key.back())) fail("duplicate key '" + key.back() + "'");
        (*node)[key.back()] = std::move(value);
    }

    Json parse_value() {
        const char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        if (text_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (text_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return parse_number();
    }

    std::string parse_basic_string() {
        expect('"');
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = get();
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            const char e = get();
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case 'u': {
                    const std::string hex = text_.substr(pos_, 4);
                    pos_ += 4;
                    const auto cp = static_cast<std::uint32_t>(std::stoul(hex, nullptr, 16));
                    if (cp < 0x80) {
                        out += static_cast<char>(cp);
                    } else if (cp < 0x800) {
                        out += static_cast<char>(0xC0 | (cp >> 6));
                        out += static_cast<char>(0x80 | (cp & 0x3F));
                    } else {
                        out += static_cast<char>(0xE0 | (cp >> 12));
                        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
                        out += static_cast<char>(0x80 | (cp & 0x3F));
                    }
                    break;
                }
                default: fail(std::string("unsupported escape \\") + e);
            }
        }
    }

    std::string parse_literal_string() {
        expect('\'');
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = get();
            if (c == '\'') return out;
            out += c;
        }
    }

    Json parse_array() {
        expect('[');
        Json out = Json::array();
        for (;;) {
            skip_array_space();
            if (peek() == ']') {
                get();
                return out;
            }
            out.push_back(parse_value());
            skip_array_space();
            if (peek() == ',') {
                get();
                continue;
            }
            expect(']');
            return out;
        }
    }

    Json parse_inline_table() {
        expect('{');
        Json out = Json::object();
        skip_inline_space();
        if (peek() == '}') {
            get();
            return out;
        }
        for (;;) {
            const std::vector<std::string> key = parse_key();
            skip_inline_space();
            expect('=');
            skip_inline_space();
            assign(out, key, parse_value());
            skip_inline_space();
            if (peek() == ',') {
                get();
                continue;
            }
            expect('}');
            return out;
        }
    }

    Json parse_number() {
        std::string raw;
        while (!eof()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '+' || c == '-' || c == '.' || c == '_') {
                raw += get();
            } else {
                break;
            }
        }
        std::string digits;
        for (char c : raw) {
            if (c != '_') digits += c;
        }
        if (digits.empty()) fail("expected a value");
        if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan") {
            fail("non-finite numbers are not accepted");
        }
        const bool is_float = digits.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                const double v = std::stod(digits, &used);
                if (used == digits.size()) return v;
            } else {
                const long long v = std::stoll(digits, &used, 10);
                if (used == digits.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("invalid value '" + raw + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

Json toml_to_json(const std::string& text) { return TomlReader(text).parse(); }

}  // namespace panelfair
