#pragma once

// JSON codec for instance and result files.
//
// Complex entries are [re, im] pairs (a bare number is read as a real entry),
// matrices are arrays of row arrays. An n x 0 matrix is n empty rows. The
// writer is deterministic: keys keep insertion order, floats use 17
// significant digits and -0 is written as 0.

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "opext/numkit.hpp"

namespace opext::io {

using Json = nlohmann::ordered_json;

inline Json encode(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline double number(const Json& v, const std::string& what) {
  if (!v.is_number()) fail(Errc::InvalidInput, what + ": expected a number");
  return v.get<double>();
}

}  // namespace detail

inline Matrix decode_matrix(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(Errc::InvalidInput, what + ": expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) fail(Errc::InvalidInput, what + ": rows must be arrays");
    cols = static_cast<Index>(j[0].size());
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      fail(Errc::InvalidInput, what + ": ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(i, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2) {
        m(i, c) = Complex(detail::number(e[0], what), detail::number(e[1], what));
      } else {
        fail(Errc::InvalidInput, what + ": entries must be numbers or [re, im] pairs");
      }
    }
  }
  require_finite(m, what);
  return m;
}

inline const Json& field(const Json& obj, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) fail(Errc::InvalidInput, "missing field \"" + key + "\"");
  return obj.at(key);
}

inline Matrix matrix_field(const Json& obj, const std::string& key) { return decode_matrix(field(obj, key), key); }

inline double number_field(const Json& obj, const std::string& key) { return detail::number(field(obj, key), key); }

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Errc::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool is_flat(const Json& j) {
  if (!j.is_array()) return !j.is_object();
  for (const Json& e : j) {
    if (e.is_object()) return false;
    if (e.is_array()) {
      for (const Json& x : e) {
        if (x.is_array() || x.is_object()) return false;
      }
    }
  }
  return true;
}

inline void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        write(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (is_flat(j)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(j[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace detail

inline std::string dump(const Json& j) {
  std::string out;
  detail::write(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace opext::io
