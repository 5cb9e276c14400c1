#include "expertrank/dataset.hpp"

#include <algorithm>
#include <string>

#include "expertrank/error.hpp"

namespace expertrank {

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  const std::size_t n_d = dataset.n_docs();
  const std::size_t n_c = dataset.n_candidates();

  auto flag = [&report](std::string where, std::string message) {
    report.push_back({std::move(where), std::move(message)});
  };

  if (dataset.a_dc.n_rows() != n_d || dataset.a_dc.n_cols() != n_c) {
    flag("a_dc", "expected " + std::to_string(n_d) + "x" + std::to_string(n_c) +
                     ", got " + std::to_string(dataset.a_dc.n_rows()) + "x" +
                     std::to_string(dataset.a_dc.n_cols()));
  }
  if (dataset.a_dd.n_rows() != n_d || dataset.a_dd.n_cols() != n_d) {
    flag("a_dd", "expected " + std::to_string(n_d) + "x" + std::to_string(n_d) +
                     ", got " + std::to_string(dataset.a_dd.n_rows()) + "x" +
                     std::to_string(dataset.a_dd.n_cols()));
  }
  if (dataset.doc_labels.size() != n_d) {
    flag("doc_labels", "size " + std::to_string(dataset.doc_labels.size()) +
                           " != n_d " + std::to_string(n_d));
  }
  if (dataset.candidate_labels.size() != n_c) {
    flag("candidate_labels", "size " + std::to_string(dataset.candidate_labels.size()) +
                                 " != n_c " + std::to_string(n_c));
  }
  if (dataset.queries.size() > n_d) {
    flag("queries", "more queries than documents");
  }

  const std::size_t n_labels = dataset.label_names.size();
  for (std::size_t d = 0; d < dataset.doc_labels.size(); ++d) {
    for (std::uint32_t l : dataset.doc_labels[d]) {
      if (l >= n_labels) {
        flag("doc_labels[" + std::to_string(d) + "]",
             "label index " + std::to_string(l) + " out of range");
        break;
      }
    }
  }
  for (std::size_t c = 0; c < dataset.candidate_labels.size(); ++c) {
    for (std::uint32_t l : dataset.candidate_labels[c]) {
      if (l >= n_labels) {
        flag("candidate_labels[" + std::to_string(c) + "]",
             "label index " + std::to_string(l) + " out of range");
        break;
      }
    }
  }

  for (std::size_t q : dataset.queries) {
    if (q >= n_d) {
      flag("queries", "query " + std::to_string(q) + " out of range");
    } else if (q >= dataset.doc_labels.size() || dataset.doc_labels[q].empty()) {
      flag("queries", "query " + std::to_string(q) + " points at an unlabeled document");
    }
  }

  return report;
}

Dataset toy_dataset() {
  Dataset ds;
  ds.documents = {{"D1", "d1 stars"},         {"D2", "d2 paper"},
                  {"D3", "d3 stars"},         {"D4", "d4 paper"},
                  {"D5", "d5 stars circles"}, {"D6", "d6 circles"}};
  ds.candidates = {"C1", "C2", "C3", "C4", "C5"};

  // Authorship: C1–{D1,D2,D3}, C2–D2, C3–{D3,D4,D5}, C4–{D5,D6}, C5–D6.
  ds.a_dc = SparseMatrix::from_triplets(6, 5,
                                        {{0, 0, 1},
                                         {1, 0, 1},
                                         {2, 0, 1},
                                         {1, 1, 1},
                                         {2, 2, 1},
                                         {3, 2, 1},
                                         {4, 2, 1},
                                         {4, 3, 1},
                                         {5, 3, 1},
                                         {5, 4, 1}});

  // Undirected document edges, stored in both directions.
  const std::pair<std::size_t, std::size_t> edges[] = {{0, 1}, {0, 3}, {1, 2},
                                                       {2, 4}, {3, 5}, {4, 5}};
  std::vector<Triplet> dd;
  for (auto [i, j] : edges) {
    dd.push_back({i, j, 1});
    dd.push_back({j, i, 1});
  }
  ds.a_dd = SparseMatrix::from_triplets(6, 6, std::move(dd));

  ds.label_names = {"star", "circle"};
  ds.doc_labels = {{0}, {}, {0}, {}, {0, 1}, {1}};
  ds.candidate_labels = {{}, {}, {0}, {0, 1}, {1}};
  ds.queries = {0, 2, 4, 5};
  return ds;
}

SparseMatrix document_network(const Dataset& dataset) {
  const std::size_t n_d = dataset.n_docs();
  if (dataset.a_dc.n_rows() != n_d || dataset.a_dd.n_rows() != n_d ||
      dataset.a_dd.n_cols() != n_d) {
    throw StructuralError("document_network: adjacency shapes disagree with n_d");
  }
  return dataset.a_dc.multiply(dataset.a_dc.transpose()).add(symmetrized(dataset.a_dd));
}

}  // namespace expertrank
