// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace fldiag::toml {

// Minimal TOML subset covering the project's metadata files: top-level and
// [section] tables, string/int/float/bool scalars, and (nested) inline
// arrays. Keys are written in sorted order so serialization is deterministic.

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<std::string, std::int64_t, double, bool, Array> v;

    Value() : v(std::string{}) {}
    Value(const char* s) : v(std::string(s)) {}
    Value(std::string s) : v(std::move(s)) {}
    Value(std::int64_t i) : v(i) {}
    Value(int i) : v(static_cast<std::int64_t>(i)) {}
    Value(std::size_t i) : v(static_cast<std::int64_t>(i)) {}
    Value(std::uint64_t i) : v(static_cast<std::int64_t>(i)) {}
    Value(double d) : v(d) {}
    Value(bool b) : v(b) {}
    Value(Array a) : v(std::move(a)) {}

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
    bool is_float() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<Array>(v); }

    const std::string& as_string() const;
    std::int64_t as_int() const;
    double as_float() const; // accepts int values too
    bool as_bool() const;
    const Array& as_array() const;
};

using TableData = std::map<std::string, Value>;

struct Table {
    TableData data;

    bool has(const std::string& key) const { return data.count(key) != 0; }
    void set(const std::string& key, Value v) { data[key] = std::move(v); }

    const Value& at(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& dflt) const;
    std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
    double get_float(const std::string& key, double dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;

    std::vector<double> get_float_array(const std::string& key,
                                        const std::vector<double>& dflt) const;
    std::vector<std::int64_t> get_int_array(const std::string& key,
                                            const std::vector<std::int64_t>& dflt) const;
};

struct Document {
    Table root;
    std::map<std::string, Table> sections;

    bool has_section(const std::string& name) const { return sections.count(name) != 0; }
    const Table& section(const std::string& name) const;
    Table& section(const std::string& name) { return sections[name]; }
};

/// Parse; throws std::runtime_error with a line number on malformed input.
Document parse(const std::string& text);
Document parse_file(const std::string& path);

std::string serialize(const Document& doc);
void write_file(const Document& doc, const std::string& path);

} // namespace fldiag::toml
