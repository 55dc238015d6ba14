#pragma once

// Deterministic output: CSV with '.' decimal, '\n' line endings, floats at 17
// significant digits (round-trip exact); binary field dumps with a 16-byte
// header ("QMFGFLD1", u16 version, u16 L_max, u16 ntheta, u16 nphi) followed
// by little-endian 64-bit floats.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmfg/sphere.hpp"

namespace qmfg {

static_assert(std::endian::native == std::endian::little,
              "binary field dumps are little-endian");

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path);
  }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }
  void row_strings(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row& operator<<(double v) {
      cells_.push_back(format_double(v));
      return *this;
    }
    Row& operator<<(int v) {
      cells_.push_back(std::to_string(v));
      return *this;
    }
    Row& operator<<(const std::string& v) {
      cells_.push_back(v);
      return *this;
    }
    ~Row() { w_.row_strings(cells_); }

   private:
    CsvWriter& w_;
    std::vector<std::string> cells_;
  };
  Row row() { return Row(*this); }

 private:
  std::ofstream out_;
};

inline void write_field_dump(const std::string& path,
                             const std::vector<SphereField>& slices) {
  if (slices.empty()) throw std::invalid_argument("write_field_dump: empty");
  const auto& tr = *slices.front().tr;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write("QMFGFLD1", 8);
  auto u16 = [&](uint16_t v) {
    out.write(reinterpret_cast<const char*>(&v), 2);
  };
  u16(1);  // version
  u16(static_cast<uint16_t>(tr.lmax()));
  u16(static_cast<uint16_t>(tr.ntheta()));
  u16(static_cast<uint16_t>(tr.nphi()));
  for (const auto& s : slices)
    out.write(reinterpret_cast<const char*>(s.grid.data()),
              static_cast<std::streamsize>(s.grid.size() * sizeof(double)));
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace qmfg
