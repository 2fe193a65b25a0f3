#include "fades/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fades {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'A', 'D', 'E', 'S', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {
      static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
      static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  os.write(b.data(), b.size());
}

void put_u64(std::ostream& os, std::uint64_t v) {
  put_u32(os, static_cast<std::uint32_t>(v & 0xFFFFFFFFull));
  put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!is) throw std::runtime_error("matrix file: truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is) {
  const std::uint64_t lo = get_u32(is);
  const std::uint64_t hi = get_u32(is);
  return lo | (hi << 32);
}

void put_values(std::ostream& os, ElementPrecision p,
                std::span<const std::int8_t> i8, std::span<const float> f32) {
  if (p == ElementPrecision::Int8) {
    os.write(reinterpret_cast<const char*>(i8.data()),
             static_cast<std::streamsize>(i8.size()));
  } else {
    for (float v : f32) put_u32(os, std::bit_cast<std::uint32_t>(v));
  }
}

void write_header(std::ostream& os, ElementPrecision p, std::uint32_t layout,
                  std::uint64_t rows, std::uint64_t cols, std::uint64_t nnz) {
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, kVersion);
  put_u32(os, p == ElementPrecision::Int8 ? 0u : 1u);
  put_u32(os, layout);
  put_u32(os, static_cast<std::uint32_t>(rows));
  put_u32(os, static_cast<std::uint32_t>(cols));
  put_u32(os, static_cast<std::uint32_t>(nnz));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream os = open_out(path);
  write_header(os, m.precision(), 0, m.rows(), m.cols(), m.size() - m.count_zeros());
  put_values(os, m.precision(), m.i8_data(), m.f32_data());
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

void save_matrix(const std::filesystem::path& path, const CsrMatrix& m) {
  validate_csr(m);
  std::ofstream os = open_out(path);
  write_header(os, m.precision, 1, m.rows, m.cols, m.nnz());
  for (std::uint64_t v : m.row_ptr) put_u64(os, v);
  for (std::uint32_t v : m.col_idx) put_u32(os, v);
  put_values(os, m.precision, m.values_i8, m.values_f32);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

LoadedMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());

  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) {
    throw std::runtime_error("matrix file: bad magic: " + path.string());
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("matrix file: unsupported version");
  }
  const std::uint32_t prec_tag = get_u32(is);
  if (prec_tag > 1) throw std::runtime_error("matrix file: bad precision tag");
  const ElementPrecision p =
      prec_tag == 0 ? ElementPrecision::Int8 : ElementPrecision::Float32;
  const std::uint32_t layout = get_u32(is);
  const std::size_t rows = get_u32(is);
  const std::size_t cols = get_u32(is);
  const std::size_t nnz = get_u32(is);

  auto read_values = [&](std::size_t n, std::vector<std::int8_t>& i8,
                         std::vector<float>& f32) {
    if (p == ElementPrecision::Int8) {
      i8.resize(n);
      is.read(reinterpret_cast<char*>(i8.data()), static_cast<std::streamsize>(n));
      if (!is) throw std::runtime_error("matrix file: truncated values");
    } else {
      f32.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        f32[i] = std::bit_cast<float>(get_u32(is));
      }
    }
  };

  if (layout == 0) {
    std::vector<std::int8_t> i8;
    std::vector<float> f32;
    read_values(rows * cols, i8, f32);
    return p == ElementPrecision::Int8
               ? DenseMatrix::from_int8(rows, cols, std::move(i8))
               : DenseMatrix::from_float(rows, cols, std::move(f32));
  }
  if (layout != 1) throw std::runtime_error("matrix file: bad layout tag");

  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.precision = p;
  m.row_ptr.resize(rows + 1);
  for (auto& v : m.row_ptr) v = get_u64(is);
  m.col_idx.resize(nnz);
  for (auto& v : m.col_idx) v = get_u32(is);
  read_values(nnz, m.values_i8, m.values_f32);
  validate_csr(m);
  return m;
}

}  // namespace fades
