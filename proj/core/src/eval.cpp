#include "expertrank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "expertrank/error.hpp"

namespace expertrank {

std::vector<std::uint8_t> relevance(const Dataset& dataset, std::size_t query) {
  if (query >= dataset.n_docs() || query >= dataset.doc_labels.size()) {
    throw Error("relevance: query " + std::to_string(query) + " out of range");
  }
  const LabelSet& wanted = dataset.doc_labels[query];
  if (wanted.empty()) {
    throw Error("relevance: query " + std::to_string(query) + " is unlabeled");
  }
  std::vector<std::uint8_t> rel(dataset.n_candidates(), 0);
  for (std::size_t c = 0; c < dataset.candidate_labels.size(); ++c) {
    const LabelSet& have = dataset.candidate_labels[c];
    bool hit = false;
    // Both sides are sorted.
    std::size_t i = 0, j = 0;
    while (i < wanted.size() && j < have.size()) {
      if (wanted[i] == have[j]) {
        hit = true;
        break;
      }
      if (wanted[i] < have[j]) ++i;
      else ++j;
    }
    rel[c] = hit ? 1 : 0;
  }
  return rel;
}

namespace {

// Indices sorted by descending score, ties by ascending index.
std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> rel) {
  if (scores.size() != rel.size()) throw Error("auc: length mismatch");
  std::size_t positives = 0;
  for (std::uint8_t r : rel) positives += r;
  const std::size_t negatives = rel.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error("auc: undefined without both relevant and non-relevant candidates");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Walk groups of tied scores, counting relevant-above-nonrelevant pairs.
  double wins = 0.0;
  std::size_t nonrel_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::size_t group_rel = 0, group_nonrel = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (rel[order[j]]) ++group_rel;
      else ++group_nonrel;
      ++j;
    }
    wins += static_cast<double>(group_rel) * static_cast<double>(nonrel_below);
    wins += 0.5 * static_cast<double>(group_rel) * static_cast<double>(group_nonrel);
    nonrel_below += group_nonrel;
    i = j;
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double precision_at_k(std::span<const double> scores, std::span<const std::uint8_t> rel,
                      std::size_t k) {
  if (scores.size() != rel.size()) throw Error("precision_at_k: length mismatch");
  if (k < 1) throw Error("precision_at_k: k must be at least 1");
  std::vector<std::size_t> order = ranking(scores);
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < std::min(k, order.size()); ++pos) {
    hits += rel[order[pos]];
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> rel) {
  if (scores.size() != rel.size()) throw Error("average_precision: length mismatch");
  std::size_t total_relevant = 0;
  for (std::uint8_t r : rel) total_relevant += r;
  if (total_relevant == 0) {
    throw Error("average_precision: undefined without relevant candidates");
  }
  std::vector<std::size_t> order = ranking(scores);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (rel[order[pos]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

namespace {

// Tie-aware ROC polyline: one point per distinct score, plus the origin.
// Returns (fpr, tpr) pairs with strictly increasing fpr, vertical runs
// collapsed to their highest tpr.
std::vector<std::pair<double, double>> roc_points(std::span<const double> scores,
                                                  std::span<const std::uint8_t> rel) {
  std::size_t positives = 0;
  for (std::uint8_t r : rel) positives += r;
  const std::size_t negatives = rel.size() - positives;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (rel[order[j]]) ++tp;
      else ++fp;
      ++j;
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
    if (points.back().first == fpr) {
      points.back().second = std::max(points.back().second, tpr);
    } else {
      points.emplace_back(fpr, tpr);
    }
    i = j;
  }
  return points;
}

double interpolate(const std::vector<std::pair<double, double>>& points, double x) {
  if (x <= points.front().first) return points.front().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (x <= points[i].first) {
      const auto& [x0, y0] = points[i - 1];
      const auto& [x1, y1] = points[i];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return points.back().second;
}

constexpr std::size_t kRocGridPoints = 101;

struct QueryOutcome {
  bool skipped = false;
  std::string skip_reason;
  QueryMetrics metrics;
  std::vector<double> roc_tpr;  // kRocGridPoints entries when requested
};

QueryOutcome run_query(const RankingModel& model, const Dataset& dataset,
                       std::size_t query, bool exclude_query_authors,
                       bool with_roc) {
  std::vector<double> scores;
  try {
    scores = model.score_query(query);
  } catch (const std::exception& e) {
    throw Error("query " + std::to_string(query) + ": " + e.what());
  }
  if (scores.size() != dataset.n_candidates()) {
    throw Error("model returned " + std::to_string(scores.size()) + " scores for query " +
                std::to_string(query) + ", expected " +
                std::to_string(dataset.n_candidates()));
  }
  std::vector<std::uint8_t> rel = relevance(dataset, query);

  if (exclude_query_authors) {
    std::vector<double> kept_scores;
    std::vector<std::uint8_t> kept_rel;
    kept_scores.reserve(scores.size());
    kept_rel.reserve(rel.size());
    auto authors = dataset.a_dc.row_cols(query);
    std::size_t a = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (a < authors.size() && authors[a] == c) {
        ++a;
        continue;
      }
      kept_scores.push_back(scores[c]);
      kept_rel.push_back(rel[c]);
    }
    scores = std::move(kept_scores);
    rel = std::move(kept_rel);
  }

  std::size_t positives = 0;
  for (std::uint8_t r : rel) positives += r;

  QueryOutcome outcome;
  if (positives == 0) {
    outcome.skipped = true;
    outcome.skip_reason = "no relevant candidates";
    return outcome;
  }
  if (positives == rel.size()) {
    outcome.skipped = true;
    outcome.skip_reason = "no non-relevant candidates";
    return outcome;
  }
  outcome.metrics.query = query;
  outcome.metrics.n_relevant = positives;
  outcome.metrics.auc = auc(scores, rel);
  outcome.metrics.p_at_10 = precision_at_k(scores, rel, 10);
  outcome.metrics.ap = average_precision(scores, rel);
  if (with_roc) {
    auto points = roc_points(scores, rel);
    outcome.roc_tpr.resize(kRocGridPoints);
    for (std::size_t g = 0; g < kRocGridPoints; ++g) {
      outcome.roc_tpr[g] = interpolate(points, static_cast<double>(g) / 100.0);
    }
  }
  return outcome;
}

MetricSummary summarize(const std::vector<QueryMetrics>& per_query,
                        double QueryMetrics::*field) {
  MetricSummary s;
  if (per_query.empty()) return s;
  double sum = 0.0;
  for (const QueryMetrics& m : per_query) sum += m.*field;
  s.mean = sum / static_cast<double>(per_query.size());
  double sq = 0.0;
  for (const QueryMetrics& m : per_query) {
    const double d = m.*field - s.mean;
    sq += d * d;
  }
  s.stddev = std::sqrt(sq / static_cast<double>(per_query.size()));
  return s;
}

}  // namespace

EvalReport evaluate(const RankingModel& model, const Dataset& dataset,
                    const EvalOptions& options) {
  const std::vector<std::size_t>& queries = dataset.queries;
  std::vector<QueryOutcome> outcomes(queries.size());

  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::size_t>(threads, std::max<std::size_t>(queries.size(), 1));

  auto worker = [&](std::size_t t, std::exception_ptr& failure) {
    try {
      for (std::size_t i = t; i < queries.size(); i += threads) {
        outcomes[i] = run_query(model, dataset, queries[i],
                                options.exclude_query_authors, options.with_roc);
      }
    } catch (...) {
      failure = std::current_exception();
    }
  };

  if (threads <= 1) {
    std::exception_ptr failure;
    worker(0, failure);
    if (failure) std::rethrow_exception(failure);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker, t, std::ref(failures[t]));
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  EvalReport report;
  if (options.with_roc) report.roc_tpr.assign(kRocGridPoints, 0.0);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (outcomes[i].skipped) {
      report.skipped.push_back({queries[i], outcomes[i].skip_reason});
    } else {
      report.per_query.push_back(outcomes[i].metrics);
      if (options.with_roc) {
        for (std::size_t g = 0; g < kRocGridPoints; ++g) {
          report.roc_tpr[g] += outcomes[i].roc_tpr[g];
        }
      }
    }
  }
  report.auc = summarize(report.per_query, &QueryMetrics::auc);
  report.p_at_10 = summarize(report.per_query, &QueryMetrics::p_at_10);
  report.ap = summarize(report.per_query, &QueryMetrics::ap);
  if (options.with_roc) {
    if (report.per_query.empty()) throw Error("roc: every query was skipped");
    for (double& v : report.roc_tpr) v /= static_cast<double>(report.per_query.size());
  }
  return report;
}

void write_report_tsv(std::ostream& out, std::string_view model_name,
                      const EvalReport& report) {
  auto row = [&](std::string_view metric, const MetricSummary& s) {
    out << model_name << '\t' << metric << '\t' << s.mean << '\t' << s.stddev << '\t'
        << report.per_query.size() << '\t' << report.skipped.size() << '\n';
  };
  row("auc", report.auc);
  row("p_at_10", report.p_at_10);
  row("ap", report.ap);
}

void write_report_json(std::ostream& out, std::string_view model_name,
                       const EvalReport& report) {
  nlohmann::json j;
  j["model"] = std::string(model_name);
  j["n_queries"] = report.per_query.size();
  j["n_skipped"] = report.skipped.size();
  j["metrics"] = {
      {"auc", {{"mean", report.auc.mean}, {"std", report.auc.stddev}}},
      {"p_at_10", {{"mean", report.p_at_10.mean}, {"std", report.p_at_10.stddev}}},
      {"ap", {{"mean", report.ap.mean}, {"std", report.ap.stddev}}},
  };
  nlohmann::json per_query = nlohmann::json::array();
  for (const QueryMetrics& m : report.per_query) {
    per_query.push_back({{"query", m.query},
                         {"auc", m.auc},
                         {"p_at_10", m.p_at_10},
                         {"ap", m.ap},
                         {"n_relevant", m.n_relevant}});
  }
  j["per_query"] = std::move(per_query);
  nlohmann::json skipped = nlohmann::json::array();
  for (const SkippedQuery& s : report.skipped) {
    skipped.push_back({{"query", s.query}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skipped);
  out << j.dump(2) << '\n';
}

std::vector<double> averaged_roc(const RankingModel& model, const Dataset& dataset,
                                 const EvalOptions& options) {
  EvalOptions with_roc = options;
  with_roc.with_roc = true;
  return evaluate(model, dataset, with_roc).roc_tpr;
}

void roc_export(const RankingModel& model, const Dataset& dataset,
                const std::filesystem::path& path, const EvalOptions& options) {
  std::vector<double> tpr = averaged_roc(model, dataset, options);
  std::ofstream out(path);
  if (!out) throw Error("roc_export: cannot open " + path.string());
  out << "fpr,tpr\n";
  char line[64];
  for (std::size_t g = 0; g < tpr.size(); ++g) {
    std::snprintf(line, sizeof(line), "%.2f,%.6f\n", static_cast<double>(g) / 100.0,
                  tpr[g]);
    out << line;
  }
  if (!out.good()) throw Error("roc_export: write failed for " + path.string());
}

}  // namespace expertrank
