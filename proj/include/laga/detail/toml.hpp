#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace laga::detail::toml {

class Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

// Covers the subset of TOML used by run configs: top-level and [section]
// tables, dotted section names, strings, integers, floats, booleans and flat
// arrays. Comments start with '#'.
class Value {
public:
    using Storage = std::variant<std::int64_t, double, bool, std::string, Array, Table>;

    Value() : v_(std::int64_t{0}) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(bool b) : v_(b) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Array a) : v_(std::move(a)) {}
    Value(Table t) : v_(std::move(t)) {}

    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_table() const { return std::holds_alternative<Table>(v_); }

    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_float() const {
        if (is_int()) return static_cast<double>(as_int());
        return std::get<double>(v_);
    }
    bool as_bool() const { return std::get<bool>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return std::get<Array>(v_); }
    const Table& as_table() const { return std::get<Table>(v_); }
    Table& as_table() { return std::get<Table>(v_); }

private:
    Storage v_;
};

class TomlError : public std::runtime_error {
public:
    explicit TomlError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace impl {

inline std::string_view strip(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Removes a trailing comment, respecting quoted strings.
inline std::string_view strip_comment(std::string_view line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (c == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline Value parse_scalar(std::string_view tok, int line_no);

inline Value parse_value(std::string_view tok, int line_no) {
    tok = strip(tok);
    if (tok.empty()) throw TomlError("line " + std::to_string(line_no) + ": empty value");
    if (tok.front() == '[') {
        if (tok.back() != ']')
            throw TomlError("line " + std::to_string(line_no) + ": unterminated array");
        Array arr;
        std::string_view body = tok.substr(1, tok.size() - 2);
        std::size_t start = 0;
        bool in_str = false;
        int depth = 0;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            const bool end = i == body.size();
            const char c = end ? ',' : body[i];
            if (!end && c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
            if (!in_str && c == '[') ++depth;
            if (!in_str && c == ']') --depth;
            if (c == ',' && !in_str && depth == 0) {
                const auto piece = strip(body.substr(start, i - start));
                if (!piece.empty()) arr.push_back(parse_value(piece, line_no));
                start = i + 1;
            }
        }
        return Value(std::move(arr));
    }
    return parse_scalar(tok, line_no);
}

inline Value parse_scalar(std::string_view tok, int line_no) {
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            throw TomlError("line " + std::to_string(line_no) + ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            char c = tok[i];
            if (c == '\\' && i + 2 < tok.size()) {
                const char n = tok[++i];
                switch (n) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case 'r': c = '\r'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default:
                        throw TomlError("line " + std::to_string(line_no) +
                                        ": unsupported escape \\" + std::string(1, n));
                }
            }
            out.push_back(c);
        }
        return Value(std::move(out));
    }
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    const std::string s(tok);
    const bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                             s.find_first_not_of("+-0123456789.eE") == std::string::npos;
    errno = 0;
    if (!looks_float) {
        char* end = nullptr;
        const long long i = std::strtoll(s.c_str(), &end, 10);
        if (end && *end == '\0' && errno == 0) return Value(static_cast<std::int64_t>(i));
    }
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end && *end == '\0' && errno == 0) return Value(d);
    throw TomlError("line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
}

inline Table* descend(Table& root, std::string_view dotted, int line_no) {
    Table* cur = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        const std::size_t dot = dotted.find('.', start);
        const auto part = strip(dotted.substr(start, dot == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : dot - start));
        if (part.empty())
            throw TomlError("line " + std::to_string(line_no) + ": empty table name component");
        auto [it, inserted] = cur->try_emplace(std::string(part), Value(Table{}));
        if (!it->second.is_table())
            throw TomlError("line " + std::to_string(line_no) + ": key '" + std::string(part) +
                            "' is not a table");
        cur = &it->second.as_table();
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return cur;
}

inline void serialize_value(const Value& v, std::ostream& os) {
    if (v.is_int()) {
        os << v.as_int();
    } else if (v.is_float()) {
        const double d = v.as_float();
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << d;
        std::string s = tmp.str();
        if (s.find_first_of(".eEnN") == std::string::npos) s += ".0";
        os << s;
    } else if (v.is_bool()) {
        os << (v.as_bool() ? "true" : "false");
    } else if (v.is_string()) {
        os << '"';
        for (char c : v.as_string()) {
            switch (c) {
                case '"': os << "\\\""; break;
                case '\\': os << "\\\\"; break;
                case '\n': os << "\\n"; break;
                case '\t': os << "\\t"; break;
                case '\r': os << "\\r"; break;
                default: os << c;
            }
        }
        os << '"';
    } else if (v.is_array()) {
        os << '[';
        const auto& arr = v.as_array();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (i) os << ", ";
            serialize_value(arr[i], os);
        }
        os << ']';
    } else {
        throw TomlError("nested table cannot be serialized as a value");
    }
}

inline void serialize_table(const Table& t, const std::string& prefix, std::ostream& os) {
    for (const auto& [key, value] : t) {
        if (value.is_table()) continue;
        os << key << " = ";
        serialize_value(value, os);
        os << '\n';
    }
    for (const auto& [key, value] : t) {
        if (!value.is_table()) continue;
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        os << '\n' << '[' << name << ']' << '\n';
        serialize_table(value.as_table(), name, os);
    }
}

}  // namespace impl

inline Table parse(std::string_view text) {
    Table root;
    Table* current = &root;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                             : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = impl::strip(impl::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw TomlError("line " + std::to_string(line_no) + ": malformed table header");
            current = impl::descend(root, line.substr(1, line.size() - 2), line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw TomlError("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = impl::strip(line.substr(0, eq));
        if (key.empty()) throw TomlError("line " + std::to_string(line_no) + ": empty key");
        auto value = impl::parse_value(line.substr(eq + 1), line_no);
        if (!current->emplace(std::string(key), std::move(value)).second)
            throw TomlError("line " + std::to_string(line_no) + ": duplicate key '" +
                            std::string(key) + "'");
    }
    return root;
}

// Deterministic emission: keys sorted (std::map order), scalar keys before
// [section] headers.
inline std::string serialize(const Table& t) {
    std::ostringstream os;
    impl::serialize_table(t, "", os);
    std::string s = os.str();
    if (!s.empty() && s.front() == '\n') s.erase(s.begin());
    return s;
}

// Lookup helpers used by config loading.
inline const Value* find(const Table& t, const std::string& key) {
    auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
}

}  // namespace laga::detail::toml
