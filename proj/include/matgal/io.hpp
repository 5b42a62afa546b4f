// SPDX-License-Identifier: Apache-2.0
#pragma once

// Parameter files (JSON) and sample/matrix files (CSV).
//
// Parameter file:
//   {
//     "family":   "mal" | "mgal" | "tal" | "tgal",
//     "location": nested array; location[i_1]...[i_D] (a k x n matrix is
//                 listed row by row),
//     "scales":   [Sigma_1, ..., Sigma_D]; for matrix families [Sigma, Psi],
//     "lambda":   number, required for mgal/tgal and forbidden otherwise
//   }
// Numbers may be JSON numbers or decimal strings.
//
// Sample CSV: optional '#' comment lines, one header row naming the vec
// index of each column (x_i_j..., 1-based, mode-1 fastest), then one draw
// per row printed with 17 significant digits.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "matgal/distributions.hpp"
#include "matgal/error.hpp"
#include "matgal/kron_linalg.hpp"

namespace matgal::io {

using nlohmann::json;

enum class Family { mal, mgal, tal, tgal };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::mal: return "mal";
    case Family::mgal: return "mgal";
    case Family::tal: return "tal";
    case Family::tgal: return "tgal";
  }
  return "?";
}

inline bool is_matrix_family(Family f) { return f == Family::mal || f == Family::mgal; }
inline bool is_generalized(Family f) { return f == Family::mgal || f == Family::tgal; }

/// A parsed parameter file: the law plus the family tag it was declared as.
struct ParamsFile {
  Family family;
  Params params;
};

/// Shortest round-trip text for a double ("inf"/"-inf"/"nan" for specials).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline double number_at(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ValidationError(where + ": not a decimal number");
    return v;
  }
  throw ValidationError(where + ": expected a number");
}

inline Matrix matrix_at(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw ValidationError(where + ": expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(where + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = number_at(row[static_cast<std::size_t>(c)],
                          where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

inline DenseTensor::Dims nested_dims(const json& j) {
  DenseTensor::Dims dims;
  const json* cur = &j;
  while (cur->is_array()) {
    if (cur->empty()) throw ValidationError("location: empty array");
    dims.push_back(cur->size());
    cur = &(*cur)[0];
  }
  return dims;
}

inline void fill_nested(const json& j, const DenseTensor::Dims& dims, std::size_t level,
                        std::vector<std::size_t>& index, DenseTensor& out) {
  if (level == dims.size()) {
    std::string where = "location";
    for (auto i : index) where += "[" + std::to_string(i) + "]";
    out.data()[static_cast<Eigen::Index>(out.offset(index))] = number_at(j, where);
    return;
  }
  if (!j.is_array() || j.size() != dims[level]) throw ValidationError("location: ragged nested array");
  for (std::size_t i = 0; i < dims[level]; ++i) {
    index[level] = i;
    fill_nested(j[i], dims, level + 1, index, out);
  }
}

inline DenseTensor tensor_at(const json& j) {
  const auto dims = nested_dims(j);
  if (dims.empty()) throw ValidationError("location: expected a nested array");
  DenseTensor out(dims);
  std::vector<std::size_t> index(dims.size());
  fill_nested(j, dims, 0, index, out);
  return out;
}

inline json tensor_to_json(const DenseTensor& t, std::size_t level, std::vector<std::size_t>& index) {
  json arr = json::array();
  for (std::size_t i = 0; i < t.dims()[level]; ++i) {
    index[level] = i;
    if (level + 1 == t.order()) {
      arr.push_back(t.data()[static_cast<Eigen::Index>(t.offset(index))]);
    } else {
      arr.push_back(tensor_to_json(t, level + 1, index));
    }
  }
  return arr;
}

inline json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    arr.push_back(std::move(row));
  }
  return arr;
}

inline SpdMatrix scale_at(const json& scales, std::size_t i) {
  const std::string where = "scales[" + std::to_string(i) + "]";
  const Matrix m = matrix_at(scales[i], where);
  try {
    return SpdMatrix(m);
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace detail

inline Family parse_family(const std::string& s) {
  if (s == "mal") return Family::mal;
  if (s == "mgal") return Family::mgal;
  if (s == "tal") return Family::tal;
  if (s == "tgal") return Family::tgal;
  throw ValidationError("family: unknown family '" + s + "'");
}

/// Validates a parsed JSON document as a parameter file.
inline ParamsFile params_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("parameter file must be a JSON object");
  if (!doc.contains("family") || !doc["family"].is_string()) {
    throw ValidationError("family: missing");
  }
  const Family family = parse_family(doc["family"].get<std::string>());
  if (!doc.contains("location")) throw ValidationError("location: missing");
  if (!doc.contains("scales") || !doc["scales"].is_array()) throw ValidationError("scales: missing");
  const json& scales = doc["scales"];

  double lambda = 1.0;
  if (is_generalized(family)) {
    if (!doc.contains("lambda")) throw ValidationError("lambda: required for family " +
                                                       std::string(family_name(family)));
    lambda = detail::number_at(doc["lambda"], "lambda");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda: must be positive");
  } else if (doc.contains("lambda")) {
    throw ValidationError("lambda: not allowed for family " + std::string(family_name(family)));
  }

  if (is_matrix_family(family)) {
    const Matrix m = detail::matrix_at(doc["location"], "location");
    if (scales.size() != 2) throw ValidationError("scales: matrix families take exactly 2 scales");
    SpdMatrix sigma = detail::scale_at(scales, 0);
    SpdMatrix psi = detail::scale_at(scales, 1);
    if (sigma.dim() != static_cast<std::size_t>(m.rows())) {
      throw ValidationError("scales[0]: must be " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.rows()) + " to match location rows");
    }
    if (psi.dim() != static_cast<std::size_t>(m.cols())) {
      throw ValidationError("scales[1]: must be " + std::to_string(m.cols()) + "x" +
                            std::to_string(m.cols()) + " to match location columns");
    }
    return {family, MgalParams(m, std::move(sigma), std::move(psi), lambda)};
  }

  DenseTensor m = detail::tensor_at(doc["location"]);
  if (scales.size() != m.order()) {
    throw ValidationError("scales: expected " + std::to_string(m.order()) +
                          " matrices, one per location mode");
  }
  std::vector<SpdMatrix> sigmas;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    sigmas.push_back(detail::scale_at(scales, i));
    if (sigmas.back().dim() != m.dims()[i]) {
      throw ValidationError("scales[" + std::to_string(i) + "]: must be " +
                            std::to_string(m.dims()[i]) + "x" + std::to_string(m.dims()[i]));
    }
  }
  return {family, TgalParams(std::move(m), std::move(sigmas), lambda)};
}

inline ParamsFile parse_params_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return params_from_json(doc);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParamsFile parse_params(const std::string& path) { return parse_params_text(read_file(path)); }

inline json params_to_json(const ParamsFile& pf) {
  json doc;
  doc["family"] = std::string(family_name(pf.family));
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        json scales = json::array();
        if constexpr (std::is_same_v<T, MgalParams>) {
          doc["location"] = detail::matrix_to_json(q.location());
          scales.push_back(detail::matrix_to_json(q.sigma().matrix()));
          scales.push_back(detail::matrix_to_json(q.psi().matrix()));
        } else {
          std::vector<std::size_t> index(q.order());
          doc["location"] = detail::tensor_to_json(q.location(), 0, index);
          for (const auto& s : q.sigmas()) scales.push_back(detail::matrix_to_json(s.matrix()));
        }
        doc["scales"] = std::move(scales);
        if (is_generalized(pf.family)) doc["lambda"] = q.lambda();
      },
      pf.params);
  return doc;
}

// ---------------------------------------------------------------------------
// CSV

/// Column names x_i1_i2..., 1-based, in vec order.
inline std::vector<std::string> vec_column_names(const DenseTensor::Dims& dims,
                                                 const std::string& prefix = "x") {
  std::vector<std::string> names;
  std::vector<std::size_t> idx(dims.size(), 0);
  const std::size_t n = total_size(dims);
  for (std::size_t k = 0; k < n; ++k) {
    std::string name = prefix;
    for (auto i : idx) name += "_" + std::to_string(i + 1);
    names.push_back(std::move(name));
    for (std::size_t m = 0; m < dims.size(); ++m) {
      if (++idx[m] < dims[m]) break;
      idx[m] = 0;
    }
  }
  return names;
}

inline void write_sample_csv(std::ostream& out, const SampleBatch& b, std::string_view family) {
  out << "# matgal sample family=" << family << " count=" << b.count() << " seed=" << b.seed
      << " params=" << b.param_digest << "\n";
  const auto names = vec_column_names(b.dims);
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << "\n";
  for (Eigen::Index j = 0; j < b.draws.cols(); ++j) {
    for (Eigen::Index i = 0; i < b.draws.rows(); ++i) {
      if (i) out << ',';
      out << format_double(b.draws(i, j));
    }
    out << "\n";
  }
}

namespace detail {

inline bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::string cell = line.substr(pos, end - pos);
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cell = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
    std::size_t used = 0;
    try {
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      return false;
    }
    if (used != cell.size()) return false;
    pos = end + 1;
  }
  return true;
}

}  // namespace detail

/// Numeric rows of a CSV file. Blank lines and '#' comments are skipped; a
/// first non-numeric row is taken as a header. All rows must have the same
/// width.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    if (!detail::parse_row(line, row)) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw ParseError(name + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    seen_content = true;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(name + ":" + std::to_string(line_no) + ": row width differs");
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<std::vector<double>> read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_numeric_csv(in, path);
}

/// A matrix stored one row per line.
inline Matrix read_matrix_csv(const std::string& path) {
  const auto rows = read_numeric_csv_file(path);
  if (rows.empty()) throw ParseError(path + ": no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace matgal::io
