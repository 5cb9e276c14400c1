#include <doctest.h>

#include <random>

#include "expertrank/dataset.hpp"
#include "expertrank/error.hpp"
#include "testutil.hpp"

using namespace expertrank;
using namespace expertrank::testutil;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("toy fixture matches its definition") {
  Dataset ds = toy_dataset();
  CHECK(ds.n_docs() == 6);
  CHECK(ds.n_candidates() == 5);
  CHECK(validate(ds).empty());

  // D5 touches D3 and D6.
  CHECK(ds.a_dd.row_cols(4).size() == 2);
  CHECK(ds.a_dd.at(4, 2) == 1.0);
  CHECK(ds.a_dd.at(4, 5) == 1.0);

  // C1 authored D1, D2, D3.
  CHECK(ds.a_dc.at(0, 0) == 1.0);
  CHECK(ds.a_dc.at(1, 0) == 1.0);
  CHECK(ds.a_dc.at(2, 0) == 1.0);
  CHECK(ds.a_dc.at(3, 0) == 0.0);

  CHECK(ds.queries == std::vector<std::size_t>{0, 2, 4, 5});
  CHECK(ds.doc_labels[5] == LabelSet{1});           // D6: circle
  CHECK(ds.candidate_labels[3] == LabelSet{0, 1});  // C4: star+circle
}

TEST_CASE("validate flags a dimension mismatch") {
  Dataset ds = toy_dataset();
  ds.a_dc = SparseMatrix(5, 5);
  ValidationReport report = validate(ds);
  REQUIRE(report.size() == 1);
  CHECK(report[0].where == "a_dc");
}

TEST_CASE("validate flags a query at an unlabeled document") {
  Dataset ds = toy_dataset();
  ds.queries.push_back(1);  // D2 has no labels
  ValidationReport report = validate(ds);
  REQUIRE(report.size() == 1);
  CHECK(report[0].where == "queries");
}

TEST_CASE("validate flags out-of-range labels and queries") {
  Dataset ds = toy_dataset();
  ds.doc_labels[0] = {7};
  ds.queries.push_back(100);
  ValidationReport report = validate(ds);
  CHECK(report.size() == 2);
}

TEST_CASE("validate is idempotent") {
  Dataset ds = toy_dataset();
  ds.a_dd = SparseMatrix(3, 3);
  auto first = validate(ds);
  auto second = validate(ds);
  CHECK(first.size() == second.size());
  CHECK(validate(toy_dataset()).empty());
}

TEST_CASE("document_network on the toy fixture") {
  Dataset ds = toy_dataset();
  SparseMatrix a_d = document_network(ds);

  // Shared author C1 plus the D1-D2 edge.
  CHECK(a_d.at(0, 1) == 2.0);
  // D1 and D3 share C1 but have no direct edge.
  CHECK(a_d.at(0, 2) == 1.0);
  // D2 and D3 share C1 and have an edge.
  CHECK(a_d.at(1, 2) == 2.0);
  // No shared author, no edge.
  CHECK(a_d.at(0, 4) == 0.0);
  // Diagonal keeps author counts: D5 has two authors.
  CHECK(a_d.at(4, 4) == 2.0);
  CHECK(a_d.is_symmetric());
}

TEST_CASE("document_network with empty a_dd is the co-authorship product") {
  Dataset ds = toy_dataset();
  ds.a_dd = SparseMatrix(6, 6);
  SparseMatrix got = document_network(ds);
  SparseMatrix expected = ds.a_dc.multiply(ds.a_dc.transpose());
  CHECK(got == expected);
}

TEST_CASE("document_network rejects mismatched shapes") {
  Dataset ds = toy_dataset();
  ds.a_dd = SparseMatrix(4, 4);
  CHECK_THROWS_AS(document_network(ds), StructuralError);
}

TEST_CASE("document_network equals dense brute force on random matrices") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 100; ++round) {
    Dataset ds;
    const std::size_t n_d = 1 + static_cast<std::size_t>(rng() % 20);
    const std::size_t n_c = 1 + static_cast<std::size_t>(rng() % 20);
    ds.a_dc = random_count_matrix(rng, n_d, n_c, 0.3);
    ds.a_dd = random_count_matrix(rng, n_d, n_d, 0.3);
    ds.documents.resize(n_d);
    ds.candidates.resize(n_c);
    ds.doc_labels.resize(n_d);
    ds.candidate_labels.resize(n_c);

    Dense dc = to_dense(ds.a_dc);
    Dense expected =
        dense_add(dense_multiply(dc, dense_transpose(dc)), dense_max_sym(to_dense(ds.a_dd)));
    SparseMatrix got = document_network(ds);
    CHECK(got.is_symmetric());
    Dense got_dense = to_dense(got);
    for (std::size_t i = 0; i < n_d; ++i) {
      for (std::size_t j = 0; j < n_d; ++j) {
        CHECK(got_dense[i][j] == expected[i][j]);
      }
    }
  }
}

TEST_SUITE_END();
