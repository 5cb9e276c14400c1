#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expertrank/sparse.hpp"

namespace expertrank {

struct Document {
  std::string id;
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

// Sorted, unique label indices; empty means unlabeled.
using LabelSet = std::vector<std::uint32_t>;

/// An expert-finding dataset: documents and candidates tied together by an
/// authorship network (a_dc, documents × candidates) and a document network
/// (a_dd, documents × documents, stored as loaded and possibly directed).
///
/// Plain aggregate: fields can be put into inconsistent states; validate()
/// reports every broken invariant. Immutable by convention after
/// construction, so instances can be shared across threads.
struct Dataset {
  std::vector<Document> documents;
  std::vector<std::string> candidates;  // candidate ids
  SparseMatrix a_dc;                    // n_d × n_c authorship counts
  SparseMatrix a_dd;                    // n_d × n_d document links
  std::vector<std::string> label_names;
  std::vector<LabelSet> doc_labels;        // size n_d
  std::vector<LabelSet> candidate_labels;  // size n_c
  std::vector<std::size_t> queries;        // document indices, each labeled

  std::size_t n_docs() const { return documents.size(); }
  std::size_t n_candidates() const { return candidates.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  std::string where;
  std::string message;
};

// One record per broken invariant; empty when the dataset is valid.
using ValidationReport = std::vector<Violation>;

ValidationReport validate(const Dataset& dataset);

/// The six-document, five-candidate fixture: C1–{D1,D2,D3}, C2–D2,
/// C3–{D3,D4,D5}, C4–{D5,D6}, C5–D6; document edges D1–D2, D1–D4, D2–D3,
/// D3–D5, D4–D6, D5–D6; labels star/circle; queries D1, D3, D5, D6.
Dataset toy_dataset();

// A_d = A_dc·A_dc^T + max(A_dd, A_dd^T). Symmetric, n_d × n_d; the diagonal
// (per-document author count) is kept.
SparseMatrix document_network(const Dataset& dataset);

/// Candidate/document meta-network: documents first (rows 0..n_d), then
/// candidates (rows n_d..n_d+n_c). adjacency is symmetric by construction.
struct MetaNetwork {
  SparseMatrix adjacency;
  std::vector<std::string> texts;  // document texts, then meta-documents
};

}  // namespace expertrank
