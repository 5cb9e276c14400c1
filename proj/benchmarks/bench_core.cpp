#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "expertrank/dataset.hpp"
#include "expertrank/eval.hpp"
#include "expertrank/models.hpp"
#include "expertrank/text.hpp"

using namespace expertrank;

namespace {

// Synthetic dataset with Zipf-ish vocabulary and random authorship, sized by
// the benchmark argument.
Dataset synthetic_dataset(std::size_t n_docs, std::size_t n_candidates,
                          std::uint64_t seed = 12345) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> words_per_doc(10, 60);
  std::uniform_int_distribution<int> authors_per_doc(1, 3);
  std::geometric_distribution<int> word_id(0.02);

  Dataset ds;
  ds.label_names = {"topic0", "topic1", "topic2", "topic3"};
  std::vector<Triplet> dc, dd;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string text;
    const int words = words_per_doc(rng);
    for (int w = 0; w < words; ++w) {
      text += "w" + std::to_string(word_id(rng) % 5000) + " ";
    }
    ds.documents.push_back({"d" + std::to_string(d), text});
    const int authors = authors_per_doc(rng);
    for (int a = 0; a < authors; ++a) {
      dc.push_back({d, rng() % n_candidates, 1.0});
    }
    if (d > 0 && rng() % 3 == 0) {
      const std::size_t other = rng() % d;
      dd.push_back({d, other, 1.0});
      dd.push_back({other, d, 1.0});
    }
    ds.doc_labels.push_back({static_cast<std::uint32_t>(rng() % 4)});
  }
  for (std::size_t c = 0; c < n_candidates; ++c) {
    ds.candidates.push_back("c" + std::to_string(c));
    ds.candidate_labels.push_back({static_cast<std::uint32_t>(rng() % 4)});
  }
  ds.a_dc = SparseMatrix::from_triplets(n_docs, n_candidates, std::move(dc));
  ds.a_dd = SparseMatrix::from_triplets(n_docs, n_docs, std::move(dd));
  for (std::size_t d = 0; d < std::min<std::size_t>(n_docs, 64); ++d) {
    ds.queries.push_back(d);
  }
  return ds;
}

Representation doc_rep(const Dataset& ds) {
  std::vector<std::string> corpus;
  for (const Document& d : ds.documents) corpus.push_back(d.text);
  return tfidf(corpus).rep;
}

void BM_TfidfBuild(benchmark::State& state) {
  Dataset ds = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 200);
  std::vector<std::string> corpus;
  for (const Document& d : ds.documents) corpus.push_back(d.text);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tfidf(corpus));
  }
}
BENCHMARK(BM_TfidfBuild)->Arg(1000)->Arg(4000);

void BM_VotingQuery(benchmark::State& state) {
  Dataset ds = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 200);
  auto model = voting_model(ds, doc_rep(ds));
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->score_query(q));
    q = (q + 1) % ds.n_docs();
  }
}
BENCHMARK(BM_VotingQuery)->Arg(1000)->Arg(4000);

void BM_PropagationQuery(benchmark::State& state) {
  Dataset ds = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 200);
  auto model = propagation_model(ds, doc_rep(ds), {});
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->score_query(q));
    q = (q + 1) % ds.n_docs();
  }
}
BENCHMARK(BM_PropagationQuery)->Arg(1000)->Arg(4000);

void BM_AucTies(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<std::uint8_t> rel(n);
  std::uniform_int_distribution<int> bucket(0, 31);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = bucket(rng) / 31.0;
    rel[i] = rng() % 8 == 0;
  }
  rel[0] = 1;
  rel[1] = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(auc(scores, rel));
  }
}
BENCHMARK(BM_AucTies)->Arg(1000)->Arg(10000);

void BM_EvaluateSuite(benchmark::State& state) {
  Dataset ds = synthetic_dataset(2000, 300);
  auto model = voting_model(ds, doc_rep(ds));
  EvalOptions options;
  options.threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(*model, ds, options));
  }
}
BENCHMARK(BM_EvaluateSuite)->Arg(1)->Arg(4);

}  // namespace
