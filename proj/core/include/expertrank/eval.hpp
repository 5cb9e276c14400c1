#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expertrank/dataset.hpp"
#include "expertrank/models.hpp"

namespace expertrank {

// Candidate c is relevant to a query iff candidate_labels[c] intersects
// doc_labels[query]. Throws on an unlabeled or out-of-range query.
std::vector<std::uint8_t> relevance(const Dataset& dataset, std::size_t query);

// Tie-aware Mann–Whitney AUC: pairs with equal scores count one half.
// Requires at least one relevant and one non-relevant entry.
double auc(std::span<const double> scores, std::span<const std::uint8_t> rel);

// Relevant among the top k by descending score (ties by ascending index),
// divided by k even when fewer than k candidates exist.
double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> rel,
                      std::size_t k = 10);

// Requires at least one relevant entry.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> rel);

struct QueryMetrics {
  std::size_t query = 0;
  double auc = 0.0;
  double p_at_10 = 0.0;
  double ap = 0.0;
  std::size_t n_relevant = 0;
};

struct SkippedQuery {
  std::size_t query = 0;
  std::string reason;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct EvalReport {
  std::vector<QueryMetrics> per_query;
  std::vector<SkippedQuery> skipped;
  MetricSummary auc;
  MetricSummary p_at_10;
  MetricSummary ap;
  // Vertically averaged TPR at FPR = 0.00, 0.01, ..., 1.00 over the
  // evaluated queries; filled only when EvalOptions::with_roc is set.
  std::vector<double> roc_tpr;
};

struct EvalOptions {
  bool exclude_query_authors = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
  bool with_roc = false;
};

// Runs every dataset query; queries with zero relevant or zero non-relevant
// candidates are skipped with a reason. Deterministic for a deterministic
// model regardless of thread count.
EvalReport evaluate(const RankingModel& model, const Dataset& dataset,
                    const EvalOptions& options = {});

// TSV rows: model, metric, mean, std, n_queries, n_skipped (raw 0–1 scale).
void write_report_tsv(std::ostream& out, std::string_view model_name,
                      const EvalReport& report);
void write_report_json(std::ostream& out, std::string_view model_name,
                       const EvalReport& report);

// Vertically averaged ROC polyline on the 101-point FPR grid 0.00..1.00,
// written as CSV "fpr,tpr" (102 lines with the header).
void roc_export(const RankingModel& model, const Dataset& dataset,
                const std::filesystem::path& path, const EvalOptions& options = {});

// Grid/averaging backend of roc_export, exposed for tests.
std::vector<double> averaged_roc(const RankingModel& model, const Dataset& dataset,
                                 const EvalOptions& options = {});

}  // namespace expertrank
