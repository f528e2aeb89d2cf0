#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtsne/core.hpp"
#include "gtsne/errors.hpp"

namespace gtsne {

//! Round-trip-exact formatting used for every numeric artifact so that
//! reruns with identical inputs produce byte-identical files.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

//! Writes content to a temporary sibling, then renames it into place, so
//! readers never observe a partially written artifact.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(errc::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(errc::io, "rename " + tmp.string() + " -> " + path.string() +
                              ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(errc::io, "read failed for " + path.string());
  return ss.str();
}

namespace detail {

inline bool parse_double(const std::string& cell, double& out) {
  const char* s = cell.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s, &end);
  if (end == s || errno == ERANGE) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace detail

//! Reads a headerless numeric CSV: one point per row, one coordinate per
//! column.  Rejects ragged rows, non-numeric cells and non-finite values.
inline Matrix read_points_csv(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    auto cells = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      double v;
      if (!detail::parse_double(cell, v))
        throw Error(errc::invalid_input,
                    path.string() + ":" + std::to_string(lineno) +
                        ": non-numeric cell '" + cell + "'");
      if (!std::isfinite(v))
        throw Error(errc::invalid_input,
                    path.string() + ":" + std::to_string(lineno) +
                        ": non-finite value");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(errc::invalid_input,
                  path.string() + ":" + std::to_string(lineno) +
                      ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(errc::invalid_input, path.string() + ": no data rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline std::string points_to_csv(const Matrix& m) {
  std::string out;
  out.reserve(m.size() * 20);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace gtsne
