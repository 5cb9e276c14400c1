#include "expertrank/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "expertrank/error.hpp"

namespace expertrank {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class RandomModel : public RankingModel {
 public:
  RandomModel(const Dataset& dataset, std::uint64_t seed)
      : n_candidates_(dataset.n_candidates()), seed_(seed) {}

  std::string_view name() const override { return "random"; }

  std::vector<double> score_query(std::size_t query_doc) const override {
    std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(query_doc)));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> scores(n_candidates_);
    for (double& s : scores) s = uniform(rng);
    return scores;
  }

 private:
  std::size_t n_candidates_;
  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<RankingModel> random_model(const Dataset& dataset, std::uint64_t seed) {
  return std::make_unique<RandomModel>(dataset, seed);
}

std::vector<std::string> candidate_meta_documents(const Dataset& dataset) {
  std::vector<std::string> meta(dataset.n_candidates());
  for (std::size_t d = 0; d < dataset.n_docs(); ++d) {
    for (std::uint32_t c : dataset.a_dc.row_cols(d)) {
      std::string& text = meta[c];
      if (!text.empty()) text.push_back(' ');
      text += dataset.documents[d].text;
    }
  }
  return meta;
}

namespace {

class PanopticModel : public RankingModel {
 public:
  explicit PanopticModel(const Dataset& dataset)
      : n_docs_(dataset.n_docs()), n_candidates_(dataset.n_candidates()) {
    std::vector<std::string> corpus;
    corpus.reserve(n_docs_ + n_candidates_);
    for (const Document& doc : dataset.documents) corpus.push_back(doc.text);
    for (std::string& m : candidate_meta_documents(dataset)) {
      corpus.push_back(std::move(m));
    }
    rep_ = tfidf(corpus).rep;
    scorer_ = std::make_unique<CosineScorer>(rep_);
  }

  std::string_view name() const override { return "panoptic"; }

  std::vector<double> score_query(std::size_t query_doc) const override {
    std::vector<double> all = scorer_->scores_row(query_doc);
    return {all.begin() + static_cast<std::ptrdiff_t>(n_docs_), all.end()};
  }

 private:
  std::size_t n_docs_;
  std::size_t n_candidates_;
  Representation rep_;
  std::unique_ptr<CosineScorer> scorer_;
};

}  // namespace

std::unique_ptr<RankingModel> panoptic_model(const Dataset& dataset) {
  return std::make_unique<PanopticModel>(dataset);
}

std::vector<double> rrf_aggregate(std::span<const double> doc_similarities,
                                  const SparseMatrix& a_dc) {
  if (doc_similarities.size() != a_dc.n_rows()) {
    throw StructuralError("rrf_aggregate: similarity length != n_d");
  }
  std::vector<std::size_t> order(doc_similarities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return doc_similarities[a] > doc_similarities[b];
  });

  std::vector<double> scores(a_dc.n_cols(), 0.0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const double reciprocal = 1.0 / static_cast<double>(pos + 1);
    for (std::uint32_t c : a_dc.row_cols(order[pos])) {
      scores[c] += reciprocal;
    }
  }
  return scores;
}

namespace {

class VotingModel : public RankingModel {
 public:
  VotingModel(const Dataset& dataset, Representation doc_rep)
      : dataset_(&dataset), doc_rep_(std::move(doc_rep)), scorer_(doc_rep_) {
    if (doc_rep_.n_entities != dataset.n_docs()) {
      throw StructuralError("voting_model: representation rows != n_d");
    }
  }

  std::string_view name() const override { return "voting"; }

  std::vector<double> score_query(std::size_t query_doc) const override {
    return rrf_aggregate(scorer_.scores_row(query_doc), dataset_->a_dc);
  }

 private:
  const Dataset* dataset_;
  Representation doc_rep_;
  CosineScorer scorer_;
};

}  // namespace

std::unique_ptr<RankingModel> voting_model(const Dataset& dataset,
                                           Representation doc_rep) {
  return std::make_unique<VotingModel>(dataset, std::move(doc_rep));
}

PropagationModel::PropagationModel(const Dataset& dataset, Representation doc_rep,
                                   PropagationParams params)
    : dataset_(&dataset),
      doc_rep_(std::move(doc_rep)),
      scorer_(doc_rep_),
      params_(params) {
  if (!(params.restart_prob > 0.0 && params.restart_prob <= 1.0)) {
    throw Error("propagation: restart probability must lie in (0, 1]");
  }
  if (!(params.tol > 0.0)) throw Error("propagation: tol must be positive");
  if (doc_rep_.n_entities != dataset.n_docs()) {
    throw StructuralError("propagation_model: representation rows != n_d");
  }

  const std::size_t n_d = dataset.n_docs();
  const std::size_t n = n_d + dataset.n_candidates();
  const SparseMatrix dd = symmetrized(dataset.a_dd);

  std::vector<Triplet> entries;
  entries.reserve(dd.nnz() + 2 * dataset.a_dc.nnz());
  for (std::size_t d = 0; d < n_d; ++d) {
    auto cols = dd.row_cols(d);
    auto vals = dd.row_values(d);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      entries.push_back({d, cols[k], vals[k]});
    }
    auto ccols = dataset.a_dc.row_cols(d);
    auto cvals = dataset.a_dc.row_values(d);
    for (std::size_t k = 0; k < ccols.size(); ++k) {
      entries.push_back({d, n_d + ccols[k], cvals[k]});
      entries.push_back({n_d + ccols[k], d, cvals[k]});
    }
  }
  SparseMatrix a = SparseMatrix::from_triplets(n, n, std::move(entries));

  // Row-normalize, remembering dangling rows.
  dangling_.assign(n, 0);
  std::vector<Triplet> scaled;
  scaled.reserve(a.nnz());
  for (std::size_t row = 0; row < n; ++row) {
    const double sum = a.row_sum(row);
    if (sum == 0.0) {
      dangling_[row] = 1;
      continue;
    }
    auto cols = a.row_cols(row);
    auto vals = a.row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      scaled.push_back({row, cols[k], vals[k] / sum});
    }
  }
  walk_ = SparseMatrix::from_triplets(n, n, std::move(scaled)).transpose();
}

std::vector<double> PropagationModel::stationary(std::size_t query_doc) const {
  const std::size_t n_d = dataset_->n_docs();
  const std::size_t n = n_d + dataset_->n_candidates();
  const double alpha = params_.restart_prob;

  std::vector<double> restart(n, 0.0);
  std::vector<double> sims = scorer_.scores_row(query_doc);
  double sum = 0.0;
  for (std::size_t d = 0; d < n_d; ++d) {
    restart[d] = std::max(sims[d], 0.0);
    sum += restart[d];
  }
  if (sum == 0.0) {
    uniform_fallbacks_.fetch_add(1, std::memory_order_relaxed);
    std::fill(restart.begin(), restart.begin() + static_cast<std::ptrdiff_t>(n_d),
              1.0 / static_cast<double>(n_d));
  } else {
    for (std::size_t d = 0; d < n_d; ++d) restart[d] /= sum;
  }

  std::vector<double> p = restart;
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < params_.max_iter; ++iter) {
    double dangling_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dangling_[i]) dangling_mass += p[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto cols = walk_.row_cols(i);
      auto vals = walk_.row_values(i);
      double flow = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) flow += vals[k] * p[cols[k]];
      next[i] = (1.0 - alpha) * (flow + dangling_mass * restart[i]) + alpha * restart[i];
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - p[i]);
    p.swap(next);
    if (delta < params_.tol) break;
  }
  return p;
}

std::vector<double> PropagationModel::score_query(std::size_t query_doc) const {
  std::vector<double> p = stationary(query_doc);
  return {p.begin() + static_cast<std::ptrdiff_t>(dataset_->n_docs()), p.end()};
}

std::unique_ptr<PropagationModel> propagation_model(const Dataset& dataset,
                                                    Representation doc_rep,
                                                    PropagationParams params) {
  return std::make_unique<PropagationModel>(dataset, std::move(doc_rep), params);
}

MetaNetwork pre_aggregate(const Dataset& dataset) {
  const std::size_t n_d = dataset.n_docs();
  const std::size_t n_c = dataset.n_candidates();
  const SparseMatrix a_dc_t = dataset.a_dc.transpose();
  const SparseMatrix a_c = a_dc_t.multiply(dataset.a_dc);
  const SparseMatrix a_d = document_network(dataset);

  std::vector<Triplet> entries;
  entries.reserve(a_d.nnz() + a_c.nnz() + 2 * dataset.a_dc.nnz());
  auto append_block = [&entries](const SparseMatrix& block, std::size_t row_base,
                                 std::size_t col_base) {
    for (std::size_t row = 0; row < block.n_rows(); ++row) {
      auto cols = block.row_cols(row);
      auto vals = block.row_values(row);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        entries.push_back({row_base + row, col_base + cols[k], vals[k]});
      }
    }
  };
  append_block(a_d, 0, 0);
  append_block(dataset.a_dc, 0, n_d);
  append_block(a_dc_t, n_d, 0);
  append_block(a_c, n_d, n_d);

  MetaNetwork meta;
  meta.adjacency = SparseMatrix::from_triplets(n_d + n_c, n_d + n_c, std::move(entries));
  meta.texts.reserve(n_d + n_c);
  for (const Document& doc : dataset.documents) meta.texts.push_back(doc.text);
  for (std::string& m : candidate_meta_documents(dataset)) {
    meta.texts.push_back(std::move(m));
  }
  return meta;
}

namespace {

class PreAggModel : public RankingModel {
 public:
  PreAggModel(const Dataset& dataset, Representation rep)
      : n_docs_(dataset.n_docs()), rep_(std::move(rep)), scorer_(rep_) {
    if (rep_.n_entities != dataset.n_docs() + dataset.n_candidates()) {
      throw StructuralError("pre_agg_model: provider returned " +
                            std::to_string(rep_.n_entities) + " rows, expected " +
                            std::to_string(dataset.n_docs() + dataset.n_candidates()));
    }
  }

  std::string_view name() const override { return "pre-agg"; }

  std::vector<double> score_query(std::size_t query_doc) const override {
    std::vector<double> all = scorer_.scores_row(query_doc);
    return {all.begin() + static_cast<std::ptrdiff_t>(n_docs_), all.end()};
  }

 private:
  std::size_t n_docs_;
  Representation rep_;
  CosineScorer scorer_;
};

class PostAggModel : public RankingModel {
 public:
  PostAggModel(const Dataset& dataset, Representation doc_rep)
      : doc_rep_(std::move(doc_rep)) {
    if (doc_rep_.n_entities != dataset.n_docs()) {
      throw StructuralError("post_agg_model: representation rows != n_d");
    }
    const std::size_t n_c = dataset.n_candidates();

    // Averaging matrix: row c holds 1/|docs(c)| at each authored document.
    std::vector<std::size_t> degree(n_c, 0);
    for (std::size_t d = 0; d < dataset.n_docs(); ++d) {
      for (std::uint32_t c : dataset.a_dc.row_cols(d)) ++degree[c];
    }
    std::vector<Triplet> weights;
    weights.reserve(dataset.a_dc.nnz());
    for (std::size_t d = 0; d < dataset.n_docs(); ++d) {
      for (std::uint32_t c : dataset.a_dc.row_cols(d)) {
        weights.push_back({c, d, 1.0 / static_cast<double>(degree[c])});
      }
    }
    SparseMatrix mean =
        SparseMatrix::from_triplets(n_c, dataset.n_docs(), std::move(weights));

    candidates_.kind = doc_rep_.kind;
    candidates_.n_entities = n_c;
    candidates_.dim = doc_rep_.dim;
    if (doc_rep_.sparse_storage) {
      candidates_.sparse_storage = true;
      candidates_.rows_sparse = mean.multiply(doc_rep_.rows_sparse);
    } else {
      candidates_.sparse_storage = false;
      candidates_.rows_dense.assign(n_c * doc_rep_.dim, 0.0);
      for (std::size_t c = 0; c < n_c; ++c) {
        auto docs = mean.row_cols(c);
        auto w = mean.row_values(c);
        for (std::size_t k = 0; k < docs.size(); ++k) {
          auto row = doc_rep_.dense_row(docs[k]);
          for (std::size_t j = 0; j < doc_rep_.dim; ++j) {
            candidates_.rows_dense[c * doc_rep_.dim + j] += w[k] * row[j];
          }
        }
      }
    }
    scorer_ = std::make_unique<CosineScorer>(candidates_);
  }

  std::string_view name() const override { return "post-agg"; }

  std::vector<double> score_query(std::size_t query_doc) const override {
    if (doc_rep_.sparse_storage) {
      return scorer_->scores_sparse(doc_rep_.rows_sparse.row_cols(query_doc),
                                    doc_rep_.rows_sparse.row_values(query_doc));
    }
    return scorer_->scores(doc_rep_.dense_row(query_doc));
  }

 private:
  Representation doc_rep_;
  Representation candidates_;
  std::unique_ptr<CosineScorer> scorer_;
};

}  // namespace

std::unique_ptr<RankingModel> pre_agg_model(const Dataset& dataset,
                                            const MetaEmbedder& embedder) {
  return std::make_unique<PreAggModel>(dataset, embedder(pre_aggregate(dataset)));
}

std::unique_ptr<RankingModel> post_agg_model(const Dataset& dataset,
                                             Representation doc_rep) {
  return std::make_unique<PostAggModel>(dataset, std::move(doc_rep));
}

}  // namespace expertrank
