// SPDX-License-Identifier: Apache-2.0
#include "fldiag/toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fldiag::toml {

namespace {
[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw std::runtime_error("toml: line " + std::to_string(line) + ": " + msg);
}
} // namespace

const std::string& Value::as_string() const {
    if (!is_string()) throw std::runtime_error("toml: value is not a string");
    return std::get<std::string>(v);
}
std::int64_t Value::as_int() const {
    if (!is_int()) throw std::runtime_error("toml: value is not an integer");
    return std::get<std::int64_t>(v);
}
double Value::as_float() const {
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(v));
    if (!is_float()) throw std::runtime_error("toml: value is not a float");
    return std::get<double>(v);
}
bool Value::as_bool() const {
    if (!is_bool()) throw std::runtime_error("toml: value is not a bool");
    return std::get<bool>(v);
}
const Array& Value::as_array() const {
    if (!is_array()) throw std::runtime_error("toml: value is not an array");
    return std::get<Array>(v);
}

const Value& Table::at(const std::string& key) const {
    auto it = data.find(key);
    if (it == data.end()) throw std::runtime_error("toml: missing key '" + key + "'");
    return it->second;
}

std::string Table::get_string(const std::string& key, const std::string& dflt) const {
    auto it = data.find(key);
    return it == data.end() ? dflt : it->second.as_string();
}
std::int64_t Table::get_int(const std::string& key, std::int64_t dflt) const {
    auto it = data.find(key);
    return it == data.end() ? dflt : it->second.as_int();
}
double Table::get_float(const std::string& key, double dflt) const {
    auto it = data.find(key);
    return it == data.end() ? dflt : it->second.as_float();
}
bool Table::get_bool(const std::string& key, bool dflt) const {
    auto it = data.find(key);
    return it == data.end() ? dflt : it->second.as_bool();
}
std::vector<double> Table::get_float_array(const std::string& key,
                                           const std::vector<double>& dflt) const {
    auto it = data.find(key);
    if (it == data.end()) return dflt;
    std::vector<double> out;
    for (const auto& e : it->second.as_array()) out.push_back(e.as_float());
    return out;
}
std::vector<std::int64_t> Table::get_int_array(const std::string& key,
                                               const std::vector<std::int64_t>& dflt) const {
    auto it = data.find(key);
    if (it == data.end()) return dflt;
    std::vector<std::int64_t> out;
    for (const auto& e : it->second.as_array()) out.push_back(e.as_int());
    return out;
}

const Table& Document::section(const std::string& name) const {
    auto it = sections.find(name);
    if (it == sections.end())
        throw std::runtime_error("toml: missing section [" + name + "]");
    return it->second;
}

namespace {

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    std::size_t line;

    bool eol() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!eol() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
};

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
    ++c.pos; // consume '['
    Array arr;
    for (;;) {
        c.skip_ws();
        if (c.eol()) fail(c.line, "unterminated array");
        if (c.peek() == ']') {
            ++c.pos;
            return Value(std::move(arr));
        }
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.eol()) fail(c.line, "unterminated array");
        if (c.peek() == ',') {
            ++c.pos;
        } else if (c.peek() != ']') {
            fail(c.line, "expected ',' or ']' in array");
        }
    }
}

Value parse_string(Cursor& c) {
    ++c.pos; // consume '"'
    std::string out;
    while (!c.eol() && c.peek() != '"') {
        char ch = c.s[c.pos++];
        if (ch == '\\') {
            if (c.eol()) fail(c.line, "bad escape");
            char esc = c.s[c.pos++];
            switch (esc) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(c.line, "unsupported escape");
            }
        } else {
            out.push_back(ch);
        }
    }
    if (c.eol()) fail(c.line, "unterminated string");
    ++c.pos;
    return Value(std::move(out));
}

Value parse_scalar(Cursor& c) {
    std::size_t start = c.pos;
    while (!c.eol() && c.peek() != ',' && c.peek() != ']' && c.peek() != '#' &&
           c.peek() != ' ' && c.peek() != '\t')
        ++c.pos;
    std::string tok = c.s.substr(start, c.pos - start);
    if (tok.empty()) fail(c.line, "empty value");
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);

    bool looks_float = false;
    for (char ch : tok)
        if (ch == '.' || ch == 'e' || ch == 'E' || tok == "inf" || tok == "nan")
            looks_float = true;
    try {
        if (!looks_float) {
            std::size_t used = 0;
            std::int64_t i = std::stoll(tok, &used);
            if (used == tok.size()) return Value(i);
        }
        std::size_t used = 0;
        double d = std::stod(tok, &used);
        if (used != tok.size()) fail(c.line, "bad number '" + tok + "'");
        return Value(d);
    } catch (const std::invalid_argument&) {
        fail(c.line, "bad value '" + tok + "'");
    } catch (const std::out_of_range&) {
        fail(c.line, "number out of range '" + tok + "'");
    }
}

Value parse_value(Cursor& c) {
    c.skip_ws();
    if (c.eol()) fail(c.line, "missing value");
    if (c.peek() == '[') return parse_array(c);
    if (c.peek() == '"') return parse_string(c);
    return parse_scalar(c);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void emit_value(std::ostream& os, const Value& val) {
    char buf[64];
    if (val.is_string()) {
        os << '"';
        for (char ch : val.as_string()) {
            switch (ch) {
                case '"': os << "\\\""; break;
                case '\\': os << "\\\\"; break;
                case '\n': os << "\\n"; break;
                case '\t': os << "\\t"; break;
                case '\r': os << "\\r"; break;
                default: os << ch;
            }
        }
        os << '"';
    } else if (val.is_int()) {
        os << val.as_int();
    } else if (val.is_float()) {
        double d = std::get<double>(val.v);
        // Keep a float marker so the value round-trips as a float.
        std::snprintf(buf, sizeof(buf), "%.17g", d);
        std::string s(buf);
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        os << s;
    } else if (val.is_bool()) {
        os << (val.as_bool() ? "true" : "false");
    } else {
        os << '[';
        const auto& arr = val.as_array();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (i) os << ", ";
            emit_value(os, arr[i]);
        }
        os << ']';
    }
}

void emit_table(std::ostream& os, const Table& t) {
    for (const auto& [key, val] : t.data) {
        os << key << " = ";
        emit_value(os, val);
        os << "\n";
    }
}

} // namespace

Document parse(const std::string& text) {
    Document doc;
    Table* current = &doc.root;
    std::istringstream is(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            std::size_t close = line.find(']');
            if (close == std::string::npos) fail(lineno, "unterminated section header");
            std::string name = trim(line.substr(1, close - 1));
            if (name.empty()) fail(lineno, "empty section name");
            current = &doc.sections[name];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(lineno, "empty key");
        Cursor c{line, eq + 1, lineno};
        Value v = parse_value(c);
        c.skip_ws();
        if (!c.eol() && c.peek() != '#') fail(lineno, "trailing characters after value");
        current->set(key, std::move(v));
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("toml: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

std::string serialize(const Document& doc) {
    std::ostringstream os;
    emit_table(os, doc.root);
    for (const auto& [name, table] : doc.sections) {
        os << "\n[" << name << "]\n";
        emit_table(os, table);
    }
    return os.str();
}

void write_file(const Document& doc, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("toml: cannot open " + path + " for writing");
    os << serialize(doc);
}

} // namespace fldiag::toml
