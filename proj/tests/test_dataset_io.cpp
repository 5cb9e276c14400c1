#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "expertrank/dataset_io.hpp"
#include "expertrank/error.hpp"
#include "testutil.hpp"

using namespace expertrank;
using namespace expertrank::testutil;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("dataset_io");

TEST_CASE("matrix market round trip, integer and real") {
  auto dir = fresh_dir("expertrank_mm");
  std::mt19937_64 rng(53);
  SparseMatrix counts = random_count_matrix(rng, 7, 9, 0.4);
  write_matrix_market(dir / "counts.mtx", counts);
  CHECK(read_matrix_market(dir / "counts.mtx") == counts);

  SparseMatrix weights = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 0.125}, {1, 1, 3.75}, {0, 1, 1.0 / 3.0}});
  write_matrix_market(dir / "weights.mtx", weights);
  CHECK(read_matrix_market(dir / "weights.mtx") == weights);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix market reader accepts pattern and symmetric files") {
  auto dir = fresh_dir("expertrank_mm2");
  {
    std::ofstream out(dir / "pattern.mtx");
    out << "%%MatrixMarket matrix coordinate pattern symmetric\n"
        << "% a comment\n"
        << "3 3 2\n"
        << "2 1\n"
        << "3 3\n";
  }
  SparseMatrix m = read_matrix_market(dir / "pattern.mtx");
  CHECK(m.at(1, 0) == 1.0);
  CHECK(m.at(0, 1) == 1.0);  // mirrored
  CHECK(m.at(2, 2) == 1.0);
  CHECK(m.nnz() == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("matrix market reader reports malformed input with context") {
  auto dir = fresh_dir("expertrank_mm3");
  {
    std::ofstream out(dir / "bad.mtx");
    out << "%%MatrixMarket matrix coordinate integer general\n"
        << "2 2 2\n"
        << "1 1 5\n"
        << "9 1 2\n";
  }
  try {
    read_matrix_market(dir / "bad.mtx");
    CHECK(false);
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("bad.mtx:4") != std::string::npos);
  }
  CHECK_THROWS_AS(read_matrix_market(dir / "missing.mtx"), LoadError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("save and load round trip the toy dataset") {
  auto dir = fresh_dir("expertrank_roundtrip");
  Dataset ds = toy_dataset();
  save_dataset(ds, dir);
  Dataset loaded = load_dataset(dir);
  CHECK(loaded == ds);
  std::filesystem::remove_all(dir);
}

TEST_CASE("round trip preserves empty label sets and odd text") {
  auto dir = fresh_dir("expertrank_roundtrip2");
  Dataset ds = toy_dataset();
  ds.documents[1].text = "tab\there\nand a \\ backslash";
  ds.candidate_labels[0] = {};
  save_dataset(ds, dir);
  Dataset loaded = load_dataset(dir);
  CHECK(loaded == ds);
  CHECK(loaded.documents[1].text == "tab\there\nand a \\ backslash");
  CHECK(loaded.candidate_labels[0].empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("round trip on random valid datasets") {
  std::mt19937_64 rng(59);
  for (int round = 0; round < 20; ++round) {
    Dataset ds;
    const std::size_t n_d = 1 + rng() % 12;
    const std::size_t n_c = 1 + rng() % 8;
    const std::size_t n_l = 1 + rng() % 4;
    for (std::size_t d = 0; d < n_d; ++d) {
      ds.documents.push_back({"doc" + std::to_string(d),
                              d % 3 == 0 ? "" : "text " + std::to_string(rng() % 100)});
    }
    for (std::size_t c = 0; c < n_c; ++c) ds.candidates.push_back("cand" + std::to_string(c));
    for (std::size_t l = 0; l < n_l; ++l) ds.label_names.push_back("label" + std::to_string(l));
    ds.a_dc = random_count_matrix(rng, n_d, n_c, 0.3);
    ds.a_dd = random_count_matrix(rng, n_d, n_d, 0.2);
    ds.doc_labels.resize(n_d);
    ds.candidate_labels.resize(n_c);
    for (std::size_t d = 0; d < n_d; ++d) {
      if (rng() % 2) ds.doc_labels[d] = {static_cast<std::uint32_t>(rng() % n_l)};
    }
    for (std::size_t c = 0; c < n_c; ++c) {
      if (rng() % 2) ds.candidate_labels[c] = {static_cast<std::uint32_t>(rng() % n_l)};
    }
    for (std::size_t d = 0; d < n_d; ++d) {
      if (!ds.doc_labels[d].empty()) {
        ds.queries.push_back(d);
        break;
      }
    }
    REQUIRE(validate(ds).empty());

    auto dir = fresh_dir("expertrank_roundtrip_rand");
    save_dataset(ds, dir);
    CHECK(load_dataset(dir) == ds);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("load errors name the offending file") {
  auto empty = fresh_dir("expertrank_empty");
  CHECK_THROWS_AS(load_dataset(empty), LoadError);
  std::filesystem::remove_all(empty);

  // Manifest count disagreeing with the files.
  auto dir = fresh_dir("expertrank_badcount");
  Dataset ds = toy_dataset();
  save_dataset(ds, dir);
  {
    std::ifstream in(dir / "manifest.json");
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    auto pos = content.find("\"n_documents\": 6");
    REQUIRE(pos != std::string::npos);
    content.replace(pos, 16, "\"n_documents\": 7");
    std::ofstream out(dir / "manifest.json");
    out << content;
  }
  try {
    load_dataset(dir);
    CHECK(false);
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("manifest.json") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("load validates the assembled dataset") {
  auto dir = fresh_dir("expertrank_invalid");
  Dataset ds = toy_dataset();
  save_dataset(ds, dir);
  {
    // Append a query pointing at an unlabeled document and keep the manifest
    // count in step so only validation can object.
    std::ofstream out(dir / "queries.tsv", std::ios::app);
    out << "D2\n";
    std::ifstream in(dir / "manifest.json");
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    auto pos = content.find("\"n_queries\": 4");
    REQUIRE(pos != std::string::npos);
    content.replace(pos, 14, "\"n_queries\": 5");
    in.close();
    std::ofstream manifest(dir / "manifest.json");
    manifest << content;
  }
  CHECK_THROWS_AS(load_dataset(dir), LoadError);
  Dataset lenient = load_dataset(dir, /*run_validate=*/false);
  CHECK(lenient.queries.size() == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("save_dataset surfaces unwritable paths") {
  Dataset ds = toy_dataset();
  CHECK_THROWS_AS(save_dataset(ds, "/proc/nonexistent/cannot_write_here"), Error);
}

TEST_SUITE_END();
