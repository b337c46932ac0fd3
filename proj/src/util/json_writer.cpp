#include "hppl/util/json_writer.hpp"

#include <cstdio>
#include <stdexcept>

namespace hppl {

Json& Json::push(Json v) {
  auto* a = std::get_if<Array>(&v_);
  if (!a) throw std::logic_error("push on a non-array");
  a->push_back(std::move(v));
  return *this;
}

Json& Json::set(std::string key, Json v) {
  auto* o = std::get_if<Object>(&v_);
  if (!o) throw std::logic_error("set on a non-object");
  o->emplace_back(std::move(key), std::move(v));
  return *this;
}

namespace {

void write_string(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

bool Json::is_flat() const {
  if (const auto* a = std::get_if<Array>(&v_)) {
    for (const auto& e : *a) {
      if (std::holds_alternative<Array>(e.v_) || std::holds_alternative<Object>(e.v_)) return false;
    }
    return true;
  }
  if (const auto* o = std::get_if<Object>(&v_)) {
    if (o->size() > 6) return false;
    for (const auto& [k, e] : *o) {
      if (std::holds_alternative<Array>(e.v_) || std::holds_alternative<Object>(e.v_)) return false;
    }
    return true;
  }
  return true;
}

void Json::write(std::string& out, int indent) const {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (std::holds_alternative<std::monostate>(v_)) {
    out += "null";
  } else if (const auto* b = std::get_if<bool>(&v_)) {
    out += *b ? "true" : "false";
  } else if (const auto* i = std::get_if<std::int64_t>(&v_)) {
    out += std::to_string(*i);
  } else if (const auto* d = std::get_if<double>(&v_)) {
    if (!std::isfinite(*d)) {
      out += "null";
    } else {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *d);
      out += buf;
    }
  } else if (const auto* s = std::get_if<std::string>(&v_)) {
    write_string(out, *s);
  } else if (const auto* a = std::get_if<Array>(&v_)) {
    if (a->empty()) {
      out += "[]";
      return;
    }
    const bool flat = is_flat();
    out += '[';
    for (std::size_t k = 0; k < a->size(); ++k) {
      if (k) out += flat ? ", " : ",";
      if (!flat) out += "\n" + pad;
      (*a)[k].write(out, indent + 2);
    }
    if (!flat) out += "\n" + close;
    out += ']';
  } else {
    const auto& o = std::get<Object>(v_);
    if (o.empty()) {
      out += "{}";
      return;
    }
    const bool flat = is_flat() && indent > 0;
    out += '{';
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (k) out += flat ? ", " : ",";
      if (!flat) out += "\n" + pad;
      write_string(out, o[k].first);
      out += ": ";
      o[k].second.write(out, indent + 2);
    }
    if (!flat) out += "\n" + close;
    out += '}';
  }
}

std::string Json::dump() const {
  std::string out;
  write(out, 0);
  out += '\n';
  return out;
}

}  // namespace hppl
