#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>

#include "fades/matrix.hpp"
#include "fades/matrix_io.hpp"

using namespace fades;

TEST_SUITE("pack/unpack") {
  TEST_CASE("int8 lane layout, low byte first") {
    const std::vector<std::int8_t> elems = {1, 2, 3, 4};
    const PackedWords v = pack(std::span<const std::int8_t>(elems));
    REQUIRE(v.words.size() == 1);
    CHECK(v.words[0] == 0x04030201u);
    CHECK(v.logical_len == 4);
    CHECK(unpack_int8(v) == elems);
  }

  TEST_CASE("empty input") {
    const PackedWords v = pack(std::span<const std::int8_t>{});
    CHECK(v.words.empty());
    CHECK(v.logical_len == 0);
    CHECK(unpack_int8(v).empty());
  }

  TEST_CASE("float32 is the IEEE-754 bit pattern") {
    const std::vector<float> elems = {1.0f};
    const PackedWords v = pack(std::span<const float>(elems));
    REQUIRE(v.words.size() == 1);
    CHECK(v.words[0] == 0x3F800000u);
    CHECK(unpack_float(v) == elems);
  }

  TEST_CASE("two's-complement decode of lane 3") {
    PackedWords v;
    v.precision = ElementPrecision::Int8;
    v.logical_len = 4;
    v.words = {0xFF000000u};
    CHECK(unpack_int8(v) == std::vector<std::int8_t>{0, 0, 0, -1});
  }

  TEST_CASE("trailing lanes of the final word are zero") {
    const std::vector<std::int8_t> elems = {-1, -1, -1, -1, -1};
    const PackedWords v = pack(std::span<const std::int8_t>(elems));
    REQUIRE(v.words.size() == 2);
    CHECK((v.words[1] >> 8) == 0u);
  }

  TEST_CASE("range-checked int8 packing") {
    const std::vector<std::int32_t> ok = {-128, 127, 0};
    CHECK(pack_checked(ok).logical_len == 3);
    const std::vector<std::int32_t> high = {128};
    CHECK_THROWS_AS((void)pack_checked(high), std::out_of_range);
    const std::vector<std::int32_t> low = {-129};
    CHECK_THROWS_AS((void)pack_checked(low), std::out_of_range);
  }

  TEST_CASE("non-finite float rejected") {
    const std::vector<float> bad = {1.0f, std::numeric_limits<float>::infinity()};
    CHECK_THROWS_AS((void)pack(std::span<const float>(bad)), std::invalid_argument);
  }

  TEST_CASE("round-trip identity over random lengths") {
    SplitMix64 rng(101);
    for (int iter = 0; iter < 1500; ++iter) {
      const std::size_t len = rng.next() % 23;  // hits every residue mod 4
      std::vector<std::int8_t> elems(len);
      for (auto& e : elems) e = static_cast<std::int8_t>(rng.next());
      CHECK(unpack_int8(pack(std::span<const std::int8_t>(elems))) == elems);
    }
    for (int iter = 0; iter < 1000; ++iter) {
      const std::size_t len = rng.next() % 9;
      std::vector<float> elems(len);
      for (auto& e : elems) {
        e = static_cast<float>(rng.next_unit() * 2.0 - 1.0);
      }
      CHECK(unpack_float(pack(std::span<const float>(elems))) == elems);
    }
  }
}

TEST_SUITE("csr") {
  TEST_CASE("all-zero matrix") {
    const CsrMatrix c = dense_to_csr(DenseMatrix::zeros(2, 2, ElementPrecision::Int8));
    CHECK(c.row_ptr == std::vector<std::uint64_t>{0, 0, 0});
    CHECK(c.col_idx.empty());
    CHECK(c.values_i8.empty());
    CHECK(csr_to_dense(c) == DenseMatrix::zeros(2, 2, ElementPrecision::Int8));
  }

  TEST_CASE("identity structure") {
    const DenseMatrix eye = DenseMatrix::from_int8(2, 2, {1, 0, 0, 1});
    const CsrMatrix c = dense_to_csr(eye);
    CHECK(c.row_ptr == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(c.col_idx == std::vector<std::uint32_t>{0, 1});
    CHECK(c.values_i8 == std::vector<std::int8_t>{1, 1});
    CHECK(csr_to_dense(c) == eye);
  }

  TEST_CASE("fully dense CSR") {
    const DenseMatrix m = generate_matrix(8, 8, ElementPrecision::Int8, 0.0, 3);
    const CsrMatrix c = dense_to_csr(m);
    CHECK(c.nnz() == 64);
    CHECK(csr_to_dense(c) == m);
  }

  TEST_CASE("round-trips at 90% sparsity") {
    const DenseMatrix m = generate_matrix(64, 64, ElementPrecision::Int8, 0.9, 42);
    CHECK(csr_to_dense(dense_to_csr(m)) == m);
    const DenseMatrix f = generate_matrix(64, 64, ElementPrecision::Float32, 0.9, 42);
    CHECK(csr_to_dense(dense_to_csr(f)) == f);
  }

  TEST_CASE("nnz equals count of non-zero dense elements") {
    SplitMix64 rng(7);
    for (int iter = 0; iter < 50; ++iter) {
      const std::size_t r = 1 + rng.next() % 20, c = 1 + rng.next() % 20;
      const double s = rng.next_unit();
      const DenseMatrix m = generate_matrix(r, c, ElementPrecision::Int8, s, rng.next());
      CHECK(dense_to_csr(m).nnz() == m.size() - m.count_zeros());
    }
  }

  TEST_CASE("csr round-trip property both directions") {
    SplitMix64 rng(11);
    for (int iter = 0; iter < 300; ++iter) {
      const std::size_t r = 1 + rng.next() % 12, c = 1 + rng.next() % 12;
      const auto prec = iter % 2 == 0 ? ElementPrecision::Int8 : ElementPrecision::Float32;
      const DenseMatrix m = generate_matrix(r, c, prec, rng.next_unit(), rng.next());
      const CsrMatrix csr = dense_to_csr(m);
      CHECK(csr_to_dense(csr) == m);
      CHECK(dense_to_csr(csr_to_dense(csr)) == csr);
    }
  }

  TEST_CASE("structure errors") {
    CsrMatrix bad;
    bad.rows = 1;
    bad.cols = 4;
    bad.precision = ElementPrecision::Int8;
    bad.row_ptr = {0, 2};
    bad.col_idx = {2, 1};  // unsorted
    bad.values_i8 = {1, 1};
    CHECK_THROWS_AS((void)csr_to_dense(bad), std::invalid_argument);

    bad.col_idx = {1, 1};  // duplicate
    CHECK_THROWS_AS((void)csr_to_dense(bad), std::invalid_argument);

    bad.col_idx = {1, 2};
    bad.values_i8 = {1, 0};  // stored zero
    CHECK_THROWS_AS((void)csr_to_dense(bad), std::invalid_argument);

    bad.values_i8 = {1, 1};
    bad.row_ptr = {0, 3};  // nnz mismatch
    CHECK_THROWS_AS((void)csr_to_dense(bad), std::invalid_argument);

    bad.row_ptr = {0, 2};
    bad.col_idx = {1, 4};  // column out of range
    CHECK_THROWS_AS((void)csr_to_dense(bad), std::invalid_argument);
  }
}

TEST_SUITE("generate_matrix") {
  TEST_CASE("sparsity 1 gives the zero matrix") {
    const DenseMatrix m = generate_matrix(16, 16, ElementPrecision::Int8, 1.0, 5);
    CHECK(m.count_zeros() == m.size());
  }

  TEST_CASE("sparsity 0 gives no zeros") {
    const DenseMatrix m = generate_matrix(16, 16, ElementPrecision::Int8, 0.0, 5);
    CHECK(m.count_zeros() == 0);
    const DenseMatrix f = generate_matrix(16, 16, ElementPrecision::Float32, 0.0, 5);
    CHECK(f.count_zeros() == 0);
  }

  TEST_CASE("achieved sparsity within one percent at scale") {
    const DenseMatrix m = generate_matrix(1024, 1024, ElementPrecision::Int8, 0.9, 7);
    const double frac = static_cast<double>(m.count_zeros()) / m.size();
    CHECK(frac >= 0.89);
    CHECK(frac <= 0.91);
  }

  TEST_CASE("bit-reproducible for a fixed seed") {
    const auto a = generate_matrix(33, 17, ElementPrecision::Float32, 0.5, 99);
    const auto b = generate_matrix(33, 17, ElementPrecision::Float32, 0.5, 99);
    CHECK(a == b);
    const auto c = generate_matrix(33, 17, ElementPrecision::Float32, 0.5, 100);
    CHECK(a != c);
  }

  TEST_CASE("float values stay inside [-1, 1]") {
    const DenseMatrix m = generate_matrix(64, 64, ElementPrecision::Float32, 0.3, 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        CHECK(m.f32(i, j) >= -1.0f);
        CHECK(m.f32(i, j) <= 1.0f);
      }
    }
  }

  TEST_CASE("sparsity outside [0,1] rejected") {
    CHECK_THROWS_AS((void)generate_matrix(2, 2, ElementPrecision::Int8, -0.1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)generate_matrix(2, 2, ElementPrecision::Int8, 1.1, 0),
                    std::invalid_argument);
  }
}

TEST_SUITE("matrix file container") {
  static std::filesystem::path tmp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
  }

  TEST_CASE("dense round-trip, both precisions") {
    for (auto prec : {ElementPrecision::Int8, ElementPrecision::Float32}) {
      const DenseMatrix m = generate_matrix(13, 7, prec, 0.4, 21);
      const auto path = tmp_file("fades_dense_test.mat");
      save_matrix(path, m);
      const LoadedMatrix back = load_matrix(path);
      REQUIRE(std::holds_alternative<DenseMatrix>(back));
      CHECK(std::get<DenseMatrix>(back) == m);
      std::filesystem::remove(path);
    }
  }

  TEST_CASE("csr round-trip, both precisions") {
    for (auto prec : {ElementPrecision::Int8, ElementPrecision::Float32}) {
      const CsrMatrix c = dense_to_csr(generate_matrix(19, 11, prec, 0.8, 33));
      const auto path = tmp_file("fades_csr_test.mat");
      save_matrix(path, c);
      const LoadedMatrix back = load_matrix(path);
      REQUIRE(std::holds_alternative<CsrMatrix>(back));
      CHECK(std::get<CsrMatrix>(back) == c);
      std::filesystem::remove(path);
    }
  }

  TEST_CASE("header bytes are exact") {
    const DenseMatrix m = DenseMatrix::from_int8(1, 2, {5, 0});
    const auto path = tmp_file("fades_hdr_test.mat");
    save_matrix(path, m);
    std::ifstream is(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 8 + 6 * 4 + 2);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "FADESMAT");
    CHECK(bytes[8] == 1);    // version
    CHECK(bytes[12] == 0);   // precision Int8
    CHECK(bytes[16] == 0);   // dense layout
    CHECK(bytes[20] == 1);   // rows
    CHECK(bytes[24] == 2);   // cols
    CHECK(bytes[28] == 1);   // nnz
    CHECK(static_cast<std::int8_t>(bytes[32]) == 5);
    std::filesystem::remove(path);
  }

  TEST_CASE("bad magic rejected") {
    const auto path = tmp_file("fades_bad_magic.mat");
    std::ofstream os(path, std::ios::binary);
    os << "NOTAMAGC" << std::string(32, '\0');
    os.close();
    CHECK_THROWS_AS((void)load_matrix(path), std::runtime_error);
    std::filesystem::remove(path);
  }
}
