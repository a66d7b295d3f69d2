#include "archivist/parsers.hpp"

#include "archivist/errors.hpp"

#include <boost/regex.hpp>

#include <charconv>
#include <cstdint>
#include <limits>
#include <vector>

namespace archivist {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && is_space(text.front())) {
        text.remove_prefix(1);
    }
    while (!text.empty() && is_space(text.back())) {
        text.remove_suffix(1);
    }
    return text;
}

struct NumericShape {
    bool is_numeric = false;
    bool integral = false; // no fraction, no exponent
};

NumericShape numeric_shape(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        ++i;
    }
    std::size_t digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        ++i;
        ++digits;
    }
    bool fraction = false;
    if (i < s.size() && s[i] == '.') {
        fraction = true;
        ++i;
        std::size_t frac_digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            ++i;
            ++frac_digits;
        }
        if (digits == 0 && frac_digits == 0) {
            return {};
        }
    } else if (digits == 0) {
        return {};
    }
    bool exponent = false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        exponent = true;
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            ++i;
        }
        std::size_t exp_digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            ++i;
            ++exp_digits;
        }
        if (exp_digits == 0) {
            return {};
        }
    }
    if (i != s.size()) {
        return {};
    }
    return {true, !fraction && !exponent};
}

void foreach_line(std::string_view text, auto&& fn) {
    std::size_t line_no = 1;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos) ? text.substr(pos)
                                                               : text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (nl == std::string_view::npos) {
            if (!line.empty()) {
                fn(line, line_no);
            }
            break;
        }
        fn(line, line_no);
        pos = nl + 1;
        ++line_no;
    }
}

void require_utf8(std::string_view bytes) {
    if (!valid_utf8(bytes)) {
        throw EncodingError("input is not valid UTF-8");
    }
}

// `MmS.SSSs` (POSIX time default) or a plain decimal number of seconds.
double parse_duration(std::string_view token, std::size_t line_no) {
    auto fail = [&]() -> double {
        throw ParseError("malformed duration \"" + std::string(token) + "\" at line " +
                         std::to_string(line_no));
    };
    if (token.empty()) {
        return fail();
    }
    std::size_t m = token.find('m');
    if (m != std::string_view::npos) {
        if (token.back() != 's' || m == 0 || m + 1 >= token.size() - 1) {
            return fail();
        }
        std::string_view minutes = token.substr(0, m);
        std::string_view seconds = token.substr(m + 1, token.size() - m - 2);
        auto mshape = numeric_shape(minutes);
        auto sshape = numeric_shape(seconds);
        if (!mshape.is_numeric || !mshape.integral || !sshape.is_numeric ||
            minutes.front() == '+' || minutes.front() == '-' || seconds.front() == '+' ||
            seconds.front() == '-') {
            return fail();
        }
        double min_value = 0;
        double sec_value = 0;
        std::from_chars(minutes.data(), minutes.data() + minutes.size(), min_value);
        std::from_chars(seconds.data(), seconds.data() + seconds.size(), sec_value);
        return min_value * 60.0 + sec_value;
    }
    auto shape = numeric_shape(token);
    if (!shape.is_numeric || token.front() == '+' || token.front() == '-') {
        return fail();
    }
    double value = 0;
    std::from_chars(token.data(), token.data() + token.size(), value);
    return value;
}

std::vector<std::string> named_groups(std::string_view pattern) {
    std::vector<std::string> names;
    std::size_t i = 0;
    while (i < pattern.size()) {
        char c = pattern[i];
        if (c == '\\') {
            i += 2;
            continue;
        }
        if (c == '[') { // character class: no groups inside
            ++i;
            if (i < pattern.size() && pattern[i] == '^') {
                ++i;
            }
            if (i < pattern.size() && pattern[i] == ']') {
                ++i; // literal ']' right after the opener
            }
            while (i < pattern.size() && pattern[i] != ']') {
                if (pattern[i] == '\\') {
                    ++i;
                }
                ++i;
            }
            ++i;
            continue;
        }
        if (c == '(' && i + 2 < pattern.size() && pattern[i + 1] == '?') {
            std::size_t j = i + 2;
            if (j < pattern.size() && pattern[j] == 'P') {
                ++j;
            }
            char open = (j < pattern.size()) ? pattern[j] : '\0';
            if (open == '<' || open == '\'') {
                char close = (open == '<') ? '>' : '\'';
                ++j;
                if (j < pattern.size() && (pattern[j] == '=' || pattern[j] == '!')) {
                    ++i; // lookbehind, not a named group
                    continue;
                }
                std::size_t end = pattern.find(close, j);
                if (end != std::string_view::npos && end > j) {
                    names.emplace_back(pattern.substr(j, end - j));
                    i = end + 1;
                    continue;
                }
            }
        }
        ++i;
    }
    return names;
}

std::string option_text(const Value& options, std::string_view key, std::string_view fallback) {
    if (options.is_object()) {
        auto it = options.find(std::string(key));
        if (it != options.end()) {
            if (!it->is_string()) {
                throw ConfigError("parser option \"" + std::string(key) + "\" must be text");
            }
            return it->get<std::string>();
        }
    }
    return std::string(fallback);
}

// nlohmann keeps unsigned as a kind of its own; fold it into the model's
// Integer/Float split: fits in 64-bit signed -> Integer, otherwise Float.
void normalize_numbers(Value& v) {
    if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            v = static_cast<std::int64_t>(u);
        } else {
            v = static_cast<double>(u);
        }
    } else if (v.is_object() || v.is_array()) {
        for (auto& child : v) {
            normalize_numbers(child);
        }
    }
}

} // namespace

bool valid_utf8(std::string_view bytes) {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) {
            return false;
        }
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (len == 2 && cp < 0x80) {
            return false; // overlong
        }
        if (len == 3 && (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF))) {
            return false; // overlong or surrogate
        }
        if (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) {
            return false;
        }
        i += len;
    }
    return true;
}

Value classify_scalar(std::string_view lexeme) {
    std::string_view t = trim(lexeme);
    if (t == "true") {
        return Value(true);
    }
    if (t == "false") {
        return Value(false);
    }
    auto shape = numeric_shape(t);
    if (shape.is_numeric) {
        std::string_view digits = t;
        if (digits.front() == '+') { // from_chars takes no explicit plus
            digits.remove_prefix(1);
        }
        if (shape.integral) {
            std::int64_t i = 0;
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
            if (ec == std::errc() && ptr == digits.data() + digits.size()) {
                return Value(i);
            }
            // out of 64-bit range: fall through to Float
        }
        // Parse through long double so magnitudes beyond double range
        // saturate to the IEEE infinity/zero instead of being dropped
        // (from_chars leaves the output unmodified on out-of-range).
        long double d = 0;
        std::from_chars(digits.data(), digits.data() + digits.size(), d);
        return Value(static_cast<double>(d));
    }
    return Value(std::string(t));
}

Value parse_keyvalue(std::string_view bytes, std::string_view delimiter) {
    require_utf8(bytes);
    if (delimiter.empty()) {
        throw ConfigError("keyvalue delimiter must be non-empty");
    }
    Value out = Value::object();
    foreach_line(bytes, [&](std::string_view line, std::size_t line_no) {
        std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            return;
        }
        std::size_t delim = line.find(delimiter);
        if (delim == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + " has no \"" +
                             std::string(delimiter) + "\" delimiter");
        }
        std::string key{trim(line.substr(0, delim))};
        out[key] = classify_scalar(line.substr(delim + delimiter.size()));
    });
    return out;
}

Value parse_time(std::string_view bytes) {
    require_utf8(bytes);
    Value out = Value::object();
    foreach_line(bytes, [&](std::string_view line, std::size_t line_no) {
        std::string_view rest = trim(line);
        std::size_t ws = 0;
        while (ws < rest.size() && !is_space(rest[ws])) {
            ++ws;
        }
        std::string_view label = rest.substr(0, ws);
        if (label != "real" && label != "user" && label != "sys") {
            return;
        }
        std::string_view token = trim(rest.substr(ws));
        if (token.empty()) {
            throw ParseError("missing duration after \"" + std::string(label) + "\" at line " +
                             std::to_string(line_no));
        }
        out[std::string(label)] = parse_duration(token, line_no);
    });
    for (const char* label : {"real", "user", "sys"}) {
        if (!out.contains(label)) {
            throw ParseError(std::string("missing \"") + label + "\" line");
        }
    }
    return out;
}

Value parse_json(std::string_view bytes) {
    require_utf8(bytes);
    Value v;
    try {
        v = Value::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    normalize_numbers(v);
    return v;
}

Value parse_envdump(std::string_view bytes) {
    require_utf8(bytes);
    Value out = Value::object();
    foreach_line(bytes, [&](std::string_view line, std::size_t) {
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            return;
        }
        out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    });
    return out;
}

Value parse_regex_capture(std::string_view bytes, std::string_view pattern) {
    require_utf8(bytes);
    const auto names = named_groups(pattern);
    if (names.empty()) {
        throw ConfigError("regex_capture pattern has no named groups");
    }
    boost::regex re;
    try {
        re = boost::regex(std::string(pattern));
    } catch (const boost::regex_error& e) {
        throw ConfigError(std::string("regex_capture pattern does not compile: ") + e.what());
    }
    boost::cmatch match;
    if (!boost::regex_search(bytes.begin(), bytes.end(), match, re)) {
        throw ParseError("pattern matched nothing");
    }
    Value out = Value::object();
    for (const auto& name : names) {
        const auto& group = match[name];
        if (group.matched) {
            out[name] = classify_scalar(std::string_view(group.first,
                                                         static_cast<std::size_t>(group.length())));
        }
    }
    return out;
}

ParserRegistry ParserRegistry::with_builtins() {
    ParserRegistry registry;
    registry.register_parser("keyvalue", [](const Value& options, std::string_view bytes) {
        return parse_keyvalue(bytes, option_text(options, "delimiter", ":"));
    });
    registry.register_parser("time", [](const Value&, std::string_view bytes) {
        return parse_time(bytes);
    });
    registry.register_parser("json", [](const Value&, std::string_view bytes) {
        return parse_json(bytes);
    });
    registry.register_parser("envdump", [](const Value&, std::string_view bytes) {
        return parse_envdump(bytes);
    });
    registry.register_parser("regex_capture", [](const Value& options, std::string_view bytes) {
        std::string pattern = option_text(options, "pattern", "");
        if (pattern.empty()) {
            throw ConfigError("regex_capture requires a \"pattern\" option");
        }
        return parse_regex_capture(bytes, pattern);
    });
    return registry;
}

void ParserRegistry::register_parser(std::string id, ParseFn fn) {
    auto [it, inserted] = parsers_.emplace(std::move(id), std::move(fn));
    if (!inserted) {
        throw RegistryConflictError("parser \"" + it->first + "\" is already registered");
    }
}

bool ParserRegistry::contains(std::string_view id) const {
    return parsers_.find(id) != parsers_.end();
}

Value ParserRegistry::parse(const ParserSpec& spec, std::string_view bytes) const {
    auto it = parsers_.find(spec.id);
    if (it == parsers_.end()) {
        throw UnknownParserError("no parser registered under id \"" + spec.id + "\"");
    }
    return it->second(spec.options, bytes);
}

} // namespace archivist
