#include "expertrank/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "expertrank/error.hpp"

namespace expertrank {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (unsigned char ch : text) {
    if (ch >= 'a' && ch <= 'z') {
      current.push_back(static_cast<char>(ch));
    } else if (ch >= 'A' && ch <= 'Z') {
      current.push_back(static_cast<char>(ch - 'A' + 'a'));
    } else if (ch >= '0' && ch <= '9') {
      current.push_back(static_cast<char>(ch));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TfidfResult tfidf(std::span<const std::string> corpus) {
  if (corpus.empty()) throw Error("tfidf: corpus is empty");
  const std::size_t n = corpus.size();

  // Per-document term counts, plus document frequencies.
  std::vector<std::vector<std::pair<std::string, std::size_t>>> doc_counts(n);
  std::map<std::string, std::size_t> df;
  std::size_t total_tokens = 0;
  for (std::size_t d = 0; d < n; ++d) {
    auto tokens = tokenize(corpus[d]);
    total_tokens += tokens.size();
    std::sort(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t j = i;
      while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
      doc_counts[d].emplace_back(tokens[i], j - i);
      i = j;
    }
    for (const auto& [term, count] : doc_counts[d]) ++df[term];
  }
  if (total_tokens == 0) throw Error("tfidf: corpus holds no tokens");

  Vocabulary vocab;
  vocab.terms.reserve(df.size());
  vocab.doc_frequency.reserve(df.size());
  for (const auto& [term, count] : df) {
    vocab.terms.push_back(term);
    vocab.doc_frequency.push_back(count);
  }
  std::unordered_map<std::string_view, std::uint32_t> term_id;
  term_id.reserve(vocab.terms.size());
  for (std::size_t t = 0; t < vocab.terms.size(); ++t) {
    term_id.emplace(vocab.terms[t], static_cast<std::uint32_t>(t));
  }

  std::vector<double> idf(vocab.terms.size());
  for (std::size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log((1.0 + static_cast<double>(n)) /
                      (1.0 + static_cast<double>(vocab.doc_frequency[t]))) +
             1.0;
  }

  std::vector<Triplet> entries;
  entries.reserve(total_tokens);
  for (std::size_t d = 0; d < n; ++d) {
    double sq = 0.0;
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(doc_counts[d].size());
    for (const auto& [term, count] : doc_counts[d]) {
      std::uint32_t t = term_id.at(term);
      double w = static_cast<double>(count) * idf[t];
      row.emplace_back(t, w);
      sq += w * w;
    }
    const double norm = std::sqrt(sq);
    for (auto& [t, w] : row) {
      entries.push_back({d, t, w / norm});
    }
  }

  TfidfResult result;
  result.rep.kind = RepKind::tfidf;
  result.rep.n_entities = n;
  result.rep.dim = vocab.terms.size();
  result.rep.sparse_storage = true;
  result.rep.rows_sparse =
      SparseMatrix::from_triplets(n, vocab.terms.size(), std::move(entries));
  result.vocabulary = std::move(vocab);
  return result;
}

namespace {

// Thin orthonormal basis of the columns of y.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// rows (n×d, CSR) times dense (d×k).
Eigen::MatrixXd sparse_times_dense(const SparseMatrix& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_rows()),
                                              b.cols());
  for (std::size_t row = 0; row < a.n_rows(); ++row) {
    auto cols = a.row_cols(row);
    auto vals = a.row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.row(static_cast<Eigen::Index>(row)) +=
          vals[k] * b.row(static_cast<Eigen::Index>(cols[k]));
    }
  }
  return out;
}

// transpose(rows) (d×n) times dense (n×k).
Eigen::MatrixXd sparse_t_times_dense(const SparseMatrix& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_cols()),
                                              b.cols());
  for (std::size_t row = 0; row < a.n_rows(); ++row) {
    auto cols = a.row_cols(row);
    auto vals = a.row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out.row(static_cast<Eigen::Index>(cols[k])) +=
          vals[k] * b.row(static_cast<Eigen::Index>(row));
    }
  }
  return out;
}

}  // namespace

Representation lsa(const Representation& rep, std::size_t dim) {
  if (rep.kind != RepKind::tfidf || !rep.sparse_storage) {
    throw Error("lsa: input must be a tf-idf representation");
  }
  if (dim < 1) throw Error("lsa: dim must be at least 1");
  const std::size_t feasible = std::min(rep.n_entities, rep.dim);
  std::size_t k = dim;
  if (k > feasible) {
    std::cerr << "lsa: requested dim " << dim << " clamped to " << feasible << "\n";
    k = feasible;
  }

  const SparseMatrix& a = rep.rows_sparse;
  const std::size_t r = std::min(k + 16, feasible);

  // Randomized range finder with two power iterations; deterministic seed.
  std::mt19937_64 rng(0x5eed2020u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd omega(static_cast<Eigen::Index>(rep.dim),
                        static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    for (Eigen::Index j = 0; j < omega.cols(); ++j) omega(i, j) = gauss(rng);
  }

  Eigen::MatrixXd y = sparse_times_dense(a, omega);
  for (int it = 0; it < 2; ++it) {
    y = orthonormalize(y);
    Eigen::MatrixXd z = sparse_t_times_dense(a, y);
    z = orthonormalize(z);
    y = sparse_times_dense(a, z);
  }
  Eigen::MatrixXd q = orthonormalize(y);  // n × r

  // b = q^T · a, r × dim.
  Eigen::MatrixXd b = sparse_t_times_dense(a, q).transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  const Eigen::Index kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd u = q * svd.matrixU().leftCols(kk);
  Eigen::VectorXd sigma = svd.singularValues().head(kk);

  Representation out;
  out.kind = RepKind::lsa;
  out.n_entities = rep.n_entities;
  out.dim = k;
  out.sparse_storage = false;
  out.rows_dense.resize(rep.n_entities * k);
  for (std::size_t i = 0; i < rep.n_entities; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out.rows_dense[i * k + j] = u(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j)) *
                                  sigma(static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

Representation load_embeddings(const std::filesystem::path& path,
                               std::span<const std::string> entity_ids) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open embedding file");

  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string(), 1, "missing header line");
  std::istringstream header(line);
  std::size_t n = 0, dim = 0;
  if (!(header >> n >> dim) || dim == 0) {
    throw LoadError(path.string(), 1, "header must be \"<n> <dim>\"");
  }

  std::unordered_map<std::string, std::size_t> wanted;
  for (std::size_t i = 0; i < entity_ids.size(); ++i) wanted.emplace(entity_ids[i], i);

  Representation rep;
  rep.kind = RepKind::external;
  rep.n_entities = entity_ids.size();
  rep.dim = dim;
  rep.sparse_storage = false;
  rep.rows_dense.assign(entity_ids.size() * dim, 0.0);

  std::vector<char> filled(entity_ids.size(), 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id;
    row >> id;
    std::vector<double> values;
    values.reserve(dim);
    double v;
    while (row >> v) values.push_back(v);
    if (values.size() != dim) {
      throw LoadError(path.string(), line_no,
                      "expected " + std::to_string(dim) + " values for \"" + id +
                          "\", got " + std::to_string(values.size()));
    }
    auto it = wanted.find(id);
    if (it == wanted.end()) continue;
    if (filled[it->second]) {
      throw LoadError(path.string(), line_no, "duplicate entity \"" + id + "\"");
    }
    std::copy(values.begin(), values.end(),
              rep.rows_dense.begin() + static_cast<std::ptrdiff_t>(it->second * dim));
    filled[it->second] = 1;
  }

  std::vector<std::string> missing;
  for (std::size_t i = 0; i < entity_ids.size() && missing.size() < 10; ++i) {
    if (!filled[i]) missing.push_back(entity_ids[i]);
  }
  if (!missing.empty()) {
    std::string msg = "missing entities:";
    for (const auto& id : missing) msg += " " + id;
    throw LoadError(path.string(), 0, msg);
  }
  return rep;
}

namespace {

double dense_dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double dense_norm(std::span<const double> a) { return std::sqrt(dense_dot(a, a)); }

}  // namespace

std::vector<double> cosine_scores(std::span<const double> query,
                                  const Representation& rep) {
  if (query.size() != rep.dim) {
    throw StructuralError("cosine_scores: query dim " + std::to_string(query.size()) +
                          " != representation dim " + std::to_string(rep.dim));
  }
  CosineScorer scorer(rep);
  return scorer.scores(query);
}

CosineScorer::CosineScorer(const Representation& rep) : rep_(&rep) {
  norms_.resize(rep.n_entities);
  if (rep.sparse_storage) {
    for (std::size_t i = 0; i < rep.n_entities; ++i) {
      double sq = 0.0;
      for (double v : rep.rows_sparse.row_values(i)) sq += v * v;
      norms_[i] = std::sqrt(sq);
    }
    columns_ = rep.rows_sparse.transpose();
  } else {
    for (std::size_t i = 0; i < rep.n_entities; ++i) {
      norms_[i] = dense_norm(rep.dense_row(i));
    }
  }
}

std::vector<double> CosineScorer::scores(std::span<const double> query) const {
  if (query.size() != rep_->dim) {
    throw StructuralError("scores: query dim mismatch");
  }
  std::vector<double> out(rep_->n_entities, 0.0);
  const double qnorm = dense_norm(query);
  if (qnorm == 0.0) return out;

  if (rep_->sparse_storage) {
    for (std::size_t i = 0; i < rep_->n_entities; ++i) {
      if (norms_[i] == 0.0) continue;
      auto cols = rep_->rows_sparse.row_cols(i);
      auto vals = rep_->rows_sparse.row_values(i);
      double dot = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) dot += vals[k] * query[cols[k]];
      out[i] = dot / (qnorm * norms_[i]);
    }
  } else {
    for (std::size_t i = 0; i < rep_->n_entities; ++i) {
      if (norms_[i] == 0.0) continue;
      out[i] = dense_dot(query, rep_->dense_row(i)) / (qnorm * norms_[i]);
    }
  }
  return out;
}

std::vector<double> CosineScorer::scores_sparse(
    std::span<const std::uint32_t> query_cols,
    std::span<const double> query_values) const {
  if (!rep_->sparse_storage) {
    // Expand and fall back to the dense path.
    std::vector<double> dense(rep_->dim, 0.0);
    for (std::size_t k = 0; k < query_cols.size(); ++k) {
      if (query_cols[k] >= rep_->dim) throw StructuralError("scores_sparse: column out of range");
      dense[query_cols[k]] = query_values[k];
    }
    return scores(dense);
  }

  double sq = 0.0;
  for (double v : query_values) sq += v * v;
  const double qnorm = std::sqrt(sq);
  std::vector<double> out(rep_->n_entities, 0.0);
  if (qnorm == 0.0) return out;

  // Inverted-index accumulation over the query's nonzero terms.
  for (std::size_t k = 0; k < query_cols.size(); ++k) {
    if (query_cols[k] >= rep_->dim) throw StructuralError("scores_sparse: column out of range");
    auto rows = columns_.row_cols(query_cols[k]);
    auto vals = columns_.row_values(query_cols[k]);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      out[rows[j]] += query_values[k] * vals[j];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = norms_[i] == 0.0 ? 0.0 : out[i] / (qnorm * norms_[i]);
  }
  return out;
}

std::vector<double> CosineScorer::scores_row(std::size_t row) const {
  if (rep_->sparse_storage) {
    return scores_sparse(rep_->rows_sparse.row_cols(row),
                         rep_->rows_sparse.row_values(row));
  }
  return scores(rep_->dense_row(row));
}

}  // namespace expertrank
