#pragma once

// Ordered JSON output with deterministic formatting: keys keep insertion
// order, floating-point values print with 17 significant digits, files are
// written via a temporary and renamed into place.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hermlet/errors.hpp"

namespace hermlet {

class JsonValue {
 public:
  using Array = std::vector<JsonValue>;
  using Object = std::vector<std::pair<std::string, JsonValue>>;

  JsonValue() : v_(nullptr) {}
  JsonValue(std::nullptr_t) : v_(nullptr) {}
  JsonValue(bool b) : v_(b) {}
  JsonValue(int i) : v_(static_cast<std::int64_t>(i)) {}
  JsonValue(std::int64_t i) : v_(i) {}
  JsonValue(std::uint64_t i) : v_(static_cast<std::int64_t>(i)) {}
  JsonValue(double d) : v_(d) {}
  JsonValue(const char* s) : v_(std::string(s)) {}
  JsonValue(std::string s) : v_(std::move(s)) {}
  JsonValue(Array a) : v_(std::move(a)) {}
  JsonValue(Object o) : v_(std::move(o)) {}

  static JsonValue object() { return JsonValue(Object{}); }
  static JsonValue array() { return JsonValue(Array{}); }

  JsonValue& set(const std::string& key, JsonValue val) {
    auto& obj = std::get<Object>(v_);
    obj.emplace_back(key, std::move(val));
    return obj.back().second;
  }

  void push(JsonValue val) { std::get<Array>(v_).push_back(std::move(val)); }

  bool is_object() const { return std::holds_alternative<Object>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }

  static JsonValue from_doubles(const std::vector<double>& xs) {
    JsonValue a = array();
    for (double x : xs) a.push(x);
    return a;
  }

  std::string dump(int indent = -1) const {
    std::string out;
    write(out, indent, 0);
    return out;
  }

 private:
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> v_;

  static void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char ch : s) {
      switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(ch) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", ch);
            out += buf;
          } else {
            out += ch;
          }
      }
    }
    out += '"';
  }

  static void write_double(std::string& out, double d) {
    if (!std::isfinite(d)) {
      out += "null";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    out += buf;
  }

  void newline(std::string& out, int indent, int depth) const {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent) * depth, ' ');
  }

  void write(std::string& out, int indent, int depth) const {
    if (std::holds_alternative<std::nullptr_t>(v_)) {
      out += "null";
    } else if (auto* b = std::get_if<bool>(&v_)) {
      out += *b ? "true" : "false";
    } else if (auto* i = std::get_if<std::int64_t>(&v_)) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%" PRId64, *i);
      out += buf;
    } else if (auto* d = std::get_if<double>(&v_)) {
      write_double(out, *d);
    } else if (auto* s = std::get_if<std::string>(&v_)) {
      write_escaped(out, *s);
    } else if (auto* a = std::get_if<Array>(&v_)) {
      if (a->empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < a->size(); ++i) {
        if (i) out += ',';
        newline(out, indent, depth + 1);
        (*a)[i].write(out, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += ']';
    } else if (auto* o = std::get_if<Object>(&v_)) {
      if (o->empty()) {
        out += "{}";
        return;
      }
      out += '{';
      for (std::size_t i = 0; i < o->size(); ++i) {
        if (i) out += ',';
        newline(out, indent, depth + 1);
        write_escaped(out, (*o)[i].first);
        out += indent < 0 ? ":" : ": ";
        (*o)[i].second.write(out, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += '}';
    }
  }
};

/// Writes content to path atomically (temporary file + rename).
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw validation_error("cannot open output file: " + tmp.string());
    os << content;
    if (!os) throw validation_error("failed writing output file: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_report(const std::filesystem::path& path, const JsonValue& doc) {
  atomic_write(path, doc.dump(2) + "\n");
}

}  // namespace hermlet
