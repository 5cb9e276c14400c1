#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace expertrank::cli {

// Parsed `run`/`roc` configuration.
struct RunConfig {
  std::filesystem::path dataset_path;
  std::string model;  // random|panoptic|voting|propagation|pre-agg|post-agg
  std::string rep;    // "", tfidf, lsa:<dim>, external:<path>
  double alpha = 0.5;
  double tol = 1e-8;
  std::size_t max_iter = 200;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;  // empty = stdout only
  bool write_json = false;
  bool exclude_query_authors = false;
  std::size_t threads = 0;
  bool suite = false;
};

// Empty string when the model/representation combination is supported.
std::string validate_config(const RunConfig& config);

// Entry point used by both main() and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace expertrank::cli
