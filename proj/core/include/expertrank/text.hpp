#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expertrank/sparse.hpp"

namespace expertrank {

// Lowercases, splits on any non-alphanumeric byte, drops tokens shorter than
// two characters. No stemming, no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  std::vector<std::string> terms;          // sorted, unique
  std::vector<std::size_t> doc_frequency;  // aligned with terms, each >= 1
};

enum class RepKind { tfidf, lsa, external };

/// Row-per-entity vector matrix. tf-idf rows are stored sparsely (dim is the
/// vocabulary size); LSA and external embeddings are dense row-major.
struct Representation {
  RepKind kind = RepKind::external;
  std::size_t n_entities = 0;
  std::size_t dim = 0;
  bool sparse_storage = false;
  SparseMatrix rows_sparse;        // used when sparse_storage
  std::vector<double> rows_dense;  // n_entities * dim, row-major, otherwise

  std::span<const double> dense_row(std::size_t i) const {
    return {rows_dense.data() + i * dim, dim};
  }
};

struct TfidfResult {
  Vocabulary vocabulary;
  Representation rep;
};

// weight(t, d) = tf(t, d) · (ln((1+n)/(1+df(t))) + 1), rows L2-normalized.
// Token-free documents get zero rows. Throws Error when the corpus holds no
// tokens at all.
TfidfResult tfidf(std::span<const std::string> corpus);

// Rank-`dim` truncated SVD of a tf-idf representation; rows become U_k·Σ_k.
// `dim` is clamped to min(n_entities, rep.dim) with a warning on stderr.
Representation lsa(const Representation& rep, std::size_t dim);

// Text embedding file: first line "<n> <dim>", then "<id> <v1> ... <vdim>"
// per line. Rows are returned in entity_ids order.
Representation load_embeddings(const std::filesystem::path& path,
                               std::span<const std::string> entity_ids);

// score[i] = <q, v_i> / (|q|·|v_i|), 0 when either norm is zero.
std::vector<double> cosine_scores(std::span<const double> query,
                                  const Representation& rep);

/// Precomputes row norms (and, for sparse storage, a column-major view used
/// as an inverted index) so repeated queries cost one pass each.
class CosineScorer {
 public:
  explicit CosineScorer(const Representation& rep);

  std::size_t n_entities() const { return rep_->n_entities; }

  std::vector<double> scores(std::span<const double> query) const;
  std::vector<double> scores_sparse(std::span<const std::uint32_t> query_cols,
                                    std::span<const double> query_values) const;
  // Query is a row of the representation itself.
  std::vector<double> scores_row(std::size_t row) const;

 private:
  const Representation* rep_;
  std::vector<double> norms_;
  SparseMatrix columns_;  // transpose of the sparse rows, empty for dense
};

}  // namespace expertrank
