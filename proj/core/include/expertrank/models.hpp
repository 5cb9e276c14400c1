#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "expertrank/dataset.hpp"
#include "expertrank/text.hpp"

namespace expertrank {

/// Maps a query document index to one finite score per candidate.
/// Implementations are immutable after construction; score_query is pure (up
/// to internal counters) and safe to call from several threads. The dataset
/// passed to a factory must outlive the model.
class RankingModel {
 public:
  virtual ~RankingModel() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<double> score_query(std::size_t query_doc) const = 0;
};

// Scores i.i.d. uniform [0,1); a given (seed, query) pair always produces
// the same vector.
std::unique_ptr<RankingModel> random_model(const Dataset& dataset, std::uint64_t seed);

// Space-joined texts of each candidate's documents, ascending document order.
std::vector<std::string> candidate_meta_documents(const Dataset& dataset);

// Meta-document retrieval: tf-idf fitted jointly on documents and
// meta-documents, score = cosine(query document, candidate meta-document).
std::unique_ptr<RankingModel> panoptic_model(const Dataset& dataset);

// Reciprocal-rank aggregation of a full document ranking: documents are
// ranked by descending similarity (ties by ascending index, 1-based), and
// each candidate scores sum 1/rank over her documents.
std::vector<double> rrf_aggregate(std::span<const double> doc_similarities,
                                  const SparseMatrix& a_dc);

std::unique_ptr<RankingModel> voting_model(const Dataset& dataset,
                                           Representation doc_rep);

struct PropagationParams {
  double restart_prob = 0.5;  // alpha in (0, 1]
  double tol = 1e-8;
  std::size_t max_iter = 200;
};

/// Random walk with restart over the concatenated network
/// A = [[A_dd_sym, A_dc], [A_dc^T, 0]]. The restart vector spreads the
/// nonnegative query/document cosines over the document nodes; zero-degree
/// rows teleport to the restart vector.
class PropagationModel : public RankingModel {
 public:
  PropagationModel(const Dataset& dataset, Representation doc_rep,
                   PropagationParams params);

  std::string_view name() const override { return "propagation"; }
  std::vector<double> score_query(std::size_t query_doc) const override;

  // Full stationary vector (documents then candidates), for diagnostics.
  std::vector<double> stationary(std::size_t query_doc) const;

  // Queries whose restart vector fell back to uniform-over-documents.
  std::size_t uniform_fallbacks() const { return uniform_fallbacks_.load(); }

 private:
  const Dataset* dataset_;
  Representation doc_rep_;
  CosineScorer scorer_;
  PropagationParams params_;
  SparseMatrix walk_;  // transpose of the row-normalized A
  std::vector<char> dangling_;
  mutable std::atomic<std::size_t> uniform_fallbacks_{0};
};

std::unique_ptr<PropagationModel> propagation_model(const Dataset& dataset,
                                                    Representation doc_rep,
                                                    PropagationParams params = {});

// A_c = A_dc^T·A_dc, A_d = A_dc·A_dc^T + A_dd_sym,
// adjacency = [[A_d, A_dc], [A_dc^T, A_c]]; texts are the document texts
// followed by the candidate meta-documents.
MetaNetwork pre_aggregate(const Dataset& dataset);

using MetaEmbedder = std::function<Representation(const MetaNetwork&)>;

// Embeds the meta-network (n_d + n_c entities) and scores by cosine between
// the query document row and each candidate row.
std::unique_ptr<RankingModel> pre_agg_model(const Dataset& dataset,
                                            const MetaEmbedder& embedder);

// Candidate vector = unweighted mean of her documents' vectors (zero vector
// when she has none); score = cosine(query vector, candidate vector).
std::unique_ptr<RankingModel> post_agg_model(const Dataset& dataset,
                                             Representation doc_rep);

}  // namespace expertrank
