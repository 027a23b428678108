#pragma once

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmaudit/errors.hpp"
#include "swarmaudit/matrix.hpp"
#include "swarmaudit/rng.hpp"

namespace swarmaudit {

// A labeled feature table. Labels are class ids in [0, class_count).
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols; }
  bool empty() const { return labels.empty(); }

  void validate() const {
    if (features.rows != labels.size())
      throw ShapeError("dataset: feature rows != label count");
    if (!features.all_finite()) throw NumericError("dataset: non-finite feature");
    for (int y : labels)
      if (y < 0 || y >= class_count) throw ArgumentError("dataset: label out of range");
  }
};

inline Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.class_count = ds.class_count;
  out.features = Matrix(indices.size(), ds.dim());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    std::copy(ds.features.row(src), ds.features.row(src) + ds.dim(), out.features.row(r));
    out.labels.push_back(ds.labels[src]);
  }
  return out;
}

// Gaussian blobs: one class mean per class drawn uniformly on the unit
// sphere, isotropic noise with std = spread. Rows are class-major, exactly
// per_class samples per class.
inline Dataset generate_synthetic(int class_count, int per_class, int dim, double spread,
                                  std::uint64_t seed) {
  if (class_count < 2) throw ArgumentError("generate_synthetic: class_count must be >= 2");
  if (per_class < 1) throw ArgumentError("generate_synthetic: per_class must be >= 1");
  if (dim < 2) throw ArgumentError("generate_synthetic: dim must be >= 2");
  if (spread < 0.0) throw ArgumentError("generate_synthetic: spread must be >= 0");

  Rng rng(seed);
  Matrix means(class_count, dim);
  for (int c = 0; c < class_count; ++c) {
    double norm = 0.0;
    for (int j = 0; j < dim; ++j) {
      means(c, j) = rng.normal();
      norm += means(c, j) * means(c, j);
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) {  // astronomically unlikely; keep the mean at a pole
      means(c, 0) = 1.0;
      norm = 1.0;
    }
    for (int j = 0; j < dim; ++j) means(c, j) /= norm;
  }

  Dataset ds;
  ds.class_count = class_count;
  ds.features = Matrix(static_cast<std::size_t>(class_count) * per_class, dim);
  ds.labels.reserve(ds.features.rows);
  std::size_t row = 0;
  for (int c = 0; c < class_count; ++c) {
    for (int s = 0; s < per_class; ++s, ++row) {
      for (int j = 0; j < dim; ++j) ds.features(row, j) = means(c, j) + spread * rng.normal();
      ds.labels.push_back(c);
    }
  }
  return ds;
}

namespace detail {

// Reads a whole file, transparently inflating gzip when the name ends in .gz.
inline std::vector<unsigned char> read_binary_file(const std::string& path) {
  std::vector<unsigned char> bytes;
  if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw ParseError("cannot open " + path);
    unsigned char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) bytes.insert(bytes.end(), buf, buf + n);
    const bool bad = n < 0;
    gzclose(f);
    if (bad) throw ParseError("gzip read error in " + path);
    return bytes;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path);
  bytes.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  return bytes;
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
  if (off + 4 > b.size()) throw ParseError("truncated IDX header");
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_cell(const std::string& cell, const std::string& where) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && *(end - 1) == ' ') --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("unparseable CSV cell '" + cell + "' at " + where);
  return value;
}

}  // namespace detail

// IDX image+label pair (MNIST format, big-endian, gzip-optional by .gz
// suffix). Pixels are scaled to [0,1].
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto img = detail::read_binary_file(images_path);
  const auto lab = detail::read_binary_file(labels_path);

  if (detail::read_be32(img, 0) != 0x00000803u)
    throw ParseError("bad IDX image magic in " + images_path);
  if (detail::read_be32(lab, 0) != 0x00000801u)
    throw ParseError("bad IDX label magic in " + labels_path);

  const std::uint32_t n_img = detail::read_be32(img, 4);
  const std::uint32_t rows = detail::read_be32(img, 8);
  const std::uint32_t cols = detail::read_be32(img, 12);
  const std::uint32_t n_lab = detail::read_be32(lab, 4);
  if (n_img != n_lab) throw ParseError("IDX image/label count mismatch");

  const std::size_t pixels = std::size_t(rows) * cols;
  if (img.size() != 16 + std::size_t(n_img) * pixels) throw ParseError("truncated IDX image file");
  if (lab.size() != 8 + std::size_t(n_lab)) throw ParseError("truncated IDX label file");

  Dataset ds;
  ds.features = Matrix(n_img, pixels);
  ds.labels.reserve(n_img);
  int max_label = 0;
  for (std::uint32_t i = 0; i < n_img; ++i) {
    for (std::size_t p = 0; p < pixels; ++p)
      ds.features(i, p) = img[16 + std::size_t(i) * pixels + p] / 255.0;
    const int y = lab[8 + i];
    max_label = std::max(max_label, y);
    ds.labels.push_back(y);
  }
  ds.class_count = max_label + 1;
  return ds;
}

// Headerful CSV; the named column holds integer class labels, every other
// column is a feature.
inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);

  std::string line;
  if (!std::getline(f, line)) throw ParseError("empty CSV " + path);
  const auto header = detail::split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_idx = i;
  if (label_idx == header.size())
    throw ParseError("label column '" + label_column + "' not found in " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int max_label = 0;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("CSV row with " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()) + " at line " + std::to_string(lineno));
    std::vector<double> feat;
    feat.reserve(header.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string where = path + ":" + std::to_string(lineno);
      const double v = detail::parse_cell(cells[i], where);
      if (i == label_idx) {
        const int y = static_cast<int>(v);
        if (static_cast<double>(y) != v || y < 0)
          throw ParseError("label must be a nonnegative integer at " + where);
        labels.push_back(y);
        max_label = std::max(max_label, y);
      } else {
        feat.push_back(v);
      }
    }
    rows.push_back(std::move(feat));
  }
  if (rows.empty()) throw ParseError("CSV has no data rows: " + path);

  Dataset ds;
  ds.class_count = max_label + 1;
  ds.features = Matrix(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), ds.features.row(i));
  ds.labels = std::move(labels);
  return ds;
}

// Inverse of load_csv with columns x0..x{d-1},label. Used to freeze synthetic
// fixtures for cross-implementation comparisons.
inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  for (std::size_t j = 0; j < ds.dim(); ++j) f << "x" << j << ",";
  f << "label\n";
  f.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) f << ds.features(i, j) << ",";
    f << ds.labels[i] << "\n";
  }
}

}  // namespace swarmaudit
