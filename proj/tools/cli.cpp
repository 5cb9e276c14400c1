#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "expertrank/dataset_io.hpp"
#include "expertrank/error.hpp"
#include "expertrank/eval.hpp"
#include "expertrank/models.hpp"
#include "expertrank/stackexchange.hpp"
#include "expertrank/text.hpp"

namespace expertrank::cli {

namespace {

struct RepSpec {
  enum class Kind { none, tfidf, lsa, external } kind = Kind::none;
  std::size_t dim = 256;
  std::filesystem::path path;
};

RepSpec parse_rep(const std::string& rep) {
  RepSpec spec;
  if (rep.empty()) return spec;
  if (rep == "tfidf") {
    spec.kind = RepSpec::Kind::tfidf;
  } else if (rep == "lsa" || rep.rfind("lsa:", 0) == 0) {
    spec.kind = RepSpec::Kind::lsa;
    if (rep.size() > 4) {
      try {
        spec.dim = static_cast<std::size_t>(std::stoul(rep.substr(4)));
      } catch (const std::logic_error&) {
        throw Error("lsa dimension in \"" + rep + "\" is not a number");
      }
      if (spec.dim == 0) throw Error("lsa dimension must be positive");
    }
  } else if (rep.rfind("external:", 0) == 0) {
    spec.kind = RepSpec::Kind::external;
    spec.path = rep.substr(9);
    if (spec.path.empty()) throw Error("external representation needs a path");
  } else {
    throw Error("unknown representation \"" + rep +
                "\" (expected tfidf, lsa:<dim>, or external:<path>)");
  }
  return spec;
}

std::string rep_label(const RepSpec& spec) {
  switch (spec.kind) {
    case RepSpec::Kind::tfidf: return "tf-idf";
    case RepSpec::Kind::lsa: return "lsa-" + std::to_string(spec.dim);
    case RepSpec::Kind::external: return "external";
    case RepSpec::Kind::none: break;
  }
  return "";
}

// If the path does not exist, look under $EXPERTRANK_DATA.
std::filesystem::path resolve_dataset_path(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) return path;
  if (const char* base = std::getenv("EXPERTRANK_DATA")) {
    std::filesystem::path candidate = std::filesystem::path(base) / path;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return path;
}

const char* const kModels[] = {"random",      "panoptic", "voting",
                               "propagation", "pre-agg",  "post-agg"};

bool known_model(const std::string& model) {
  for (const char* m : kModels) {
    if (model == m) return true;
  }
  return false;
}

std::vector<std::string> document_ids(const Dataset& ds) {
  std::vector<std::string> ids;
  ids.reserve(ds.n_docs());
  for (const Document& d : ds.documents) ids.push_back(d.id);
  return ids;
}

Representation build_doc_rep(const Dataset& ds, const RepSpec& spec) {
  switch (spec.kind) {
    case RepSpec::Kind::none:
    case RepSpec::Kind::tfidf: {
      std::vector<std::string> corpus;
      corpus.reserve(ds.n_docs());
      for (const Document& d : ds.documents) corpus.push_back(d.text);
      return tfidf(corpus).rep;
    }
    case RepSpec::Kind::lsa: {
      std::vector<std::string> corpus;
      corpus.reserve(ds.n_docs());
      for (const Document& d : ds.documents) corpus.push_back(d.text);
      return lsa(tfidf(corpus).rep, spec.dim);
    }
    case RepSpec::Kind::external:
      return load_embeddings(spec.path, document_ids(ds));
  }
  throw Error("unreachable representation kind");
}

MetaEmbedder build_meta_embedder(const Dataset& ds, const RepSpec& spec) {
  if (spec.kind == RepSpec::Kind::lsa) {
    std::size_t dim = spec.dim;
    return [dim](const MetaNetwork& meta) { return lsa(tfidf(meta.texts).rep, dim); };
  }
  // external: ids are the document ids followed by the candidate ids.
  std::vector<std::string> ids = document_ids(ds);
  ids.insert(ids.end(), ds.candidates.begin(), ds.candidates.end());
  std::filesystem::path path = spec.path;
  return [ids = std::move(ids), path](const MetaNetwork&) {
    return load_embeddings(path, ids);
  };
}

struct NamedModel {
  std::string display;
  std::unique_ptr<RankingModel> model;
  const PropagationModel* propagation = nullptr;
};

NamedModel build_model(const Dataset& ds, const RunConfig& config,
                       const RepSpec& spec) {
  NamedModel out;
  if (config.model == "random") {
    out.display = "random";
    out.model = random_model(ds, config.seed);
  } else if (config.model == "panoptic") {
    out.display = "panoptic (tf-idf)";
    out.model = panoptic_model(ds);
  } else if (config.model == "voting") {
    out.display = "voting (" + rep_label(spec) + ")";
    out.model = voting_model(ds, build_doc_rep(ds, spec));
  } else if (config.model == "propagation") {
    out.display = "propagation (" + rep_label(spec) + ")";
    PropagationParams params;
    params.restart_prob = config.alpha;
    params.tol = config.tol;
    params.max_iter = config.max_iter;
    auto model = propagation_model(ds, build_doc_rep(ds, spec), params);
    out.propagation = model.get();
    out.model = std::move(model);
  } else if (config.model == "pre-agg") {
    out.display = "pre-agg (" + rep_label(spec) + ")";
    out.model = pre_agg_model(ds, build_meta_embedder(ds, spec));
  } else if (config.model == "post-agg") {
    out.display = "post-agg (" + rep_label(spec) + ")";
    out.model = post_agg_model(ds, build_doc_rep(ds, spec));
  } else {
    throw Error("unknown model \"" + config.model + "\"");
  }
  return out;
}

void print_table_header(std::ostream& out) {
  char line[128];
  std::snprintf(line, sizeof(line), "%-24s %-15s %-15s %-15s\n", "model", "AUC",
                "P@10", "AP");
  out << line;
}

// Means and deviations are printed ×100, zero-padded like the tables in the
// literature (e.g. "05.00 (06.66)").
void print_table_row(std::ostream& out, const std::string& name,
                     const EvalReport& report) {
  auto cell = [](const MetricSummary& s) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%05.2f (%05.2f)", 100.0 * s.mean,
                  100.0 * s.stddev);
    return std::string(buffer);
  };
  char line[192];
  std::snprintf(line, sizeof(line), "%-24s %-15s %-15s %-15s\n", name.c_str(),
                cell(report.auc).c_str(), cell(report.p_at_10).c_str(),
                cell(report.ap).c_str());
  out << line;
}

int cmd_validate(const std::filesystem::path& dir, std::ostream& out,
                 std::ostream& err) {
  Dataset ds;
  try {
    ds = load_dataset(resolve_dataset_path(dir), /*run_validate=*/false);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  ValidationReport violations = validate(ds);
  if (violations.empty()) {
    out << "valid: " << ds.n_docs() << " documents, " << ds.n_candidates()
        << " candidates, " << ds.queries.size() << " queries\n";
    return 0;
  }
  for (const Violation& v : violations) {
    out << "violation [" << v.where << "] " << v.message << '\n';
  }
  return 1;
}

struct IngestArgs {
  std::filesystem::path posts_path;
  std::filesystem::path out_dir;
  IngestParams params;
};

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream xml(args.posts_path);
    if (!xml) throw Error("cannot open posts file " + args.posts_path.string());
    std::vector<StackExchangePost> posts = parse_posts(xml);
    IngestLog log;
    Dataset ds = build_stackexchange(std::move(posts), args.params, &log);
    save_dataset(ds, args.out_dir);

    std::size_t experts = 0;
    for (const LabelSet& set : ds.candidate_labels) {
      if (!set.empty()) ++experts;
    }
    out << "candidates\tdocuments\tlabels\texperts\tqueries\n";
    out << ds.n_candidates() << '\t' << ds.n_docs() << '\t' << ds.label_names.size()
        << '\t' << experts << '\t' << ds.queries.size() << '\n';
    if (log.orphan_answers > 0) {
      err << "note: dropped " << log.orphan_answers << " answers without a parent\n";
    }
    if (log.ownerless_answers > 0) {
      err << "note: dropped " << log.ownerless_answers << " answers without an owner\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (!config.suite) {
      std::string complaint = validate_config(config);
      if (!complaint.empty()) {
        err << "error: " << complaint << '\n';
        return 2;
      }
    }
    Dataset ds = load_dataset(resolve_dataset_path(config.dataset_path));

    EvalOptions options;
    options.exclude_query_authors = config.exclude_query_authors;
    options.threads = config.threads;

    std::vector<std::pair<std::string, EvalReport>> results;
    auto run_one = [&](const RunConfig& one) {
      NamedModel named = build_model(ds, one, parse_rep(one.rep));
      EvalReport report = evaluate(*named.model, ds, options);
      if (named.propagation && named.propagation->uniform_fallbacks() > 0) {
        err << "note: " << named.propagation->uniform_fallbacks()
            << " queries fell back to a uniform restart vector\n";
      }
      results.emplace_back(named.display, std::move(report));
    };

    if (config.suite) {
      for (const char* model : {"random", "panoptic", "voting", "propagation"}) {
        RunConfig one = config;
        one.model = model;
        one.rep = (std::string(model) == "voting" || std::string(model) == "propagation")
                      ? "tfidf"
                      : "";
        run_one(one);
      }
    } else {
      run_one(config);
    }

    print_table_header(out);
    for (const auto& [name, report] : results) {
      print_table_row(out, name, report);
      if (!report.skipped.empty()) {
        err << "note: " << name << " skipped " << report.skipped.size()
            << " queries\n";
      }
    }

    if (!config.output_dir.empty()) {
      std::filesystem::create_directories(config.output_dir);
      const auto tsv_path = config.output_dir / "report.tsv";
      std::ofstream tsv(tsv_path);
      if (!tsv) throw Error("cannot open " + tsv_path.string());
      tsv << "model\tmetric\tmean\tstd\tn_queries\tn_skipped\n";
      for (const auto& [name, report] : results) {
        write_report_tsv(tsv, name, report);
      }
      if (!tsv.good()) throw Error("write failed for " + tsv_path.string());
      if (config.write_json) {
        const auto json_path = config.output_dir / "report.json";
        std::ofstream json(json_path);
        if (!json) throw Error("cannot open " + json_path.string());
        for (const auto& [name, report] : results) {
          write_report_json(json, name, report);
        }
        if (!json.good()) throw Error("write failed for " + json_path.string());
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int cmd_roc(const RunConfig& config, const std::filesystem::path& csv_path,
            std::ostream& /*out*/, std::ostream& err) {
  try {
    std::string complaint = validate_config(config);
    if (!complaint.empty()) {
      err << "error: " << complaint << '\n';
      return 2;
    }
    Dataset ds = load_dataset(resolve_dataset_path(config.dataset_path));
    NamedModel named = build_model(ds, config, parse_rep(config.rep));
    EvalOptions options;
    options.exclude_query_authors = config.exclude_query_authors;
    options.threads = config.threads;
    roc_export(*named.model, ds, csv_path, options);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

std::string validate_config(const RunConfig& config) {
  if (!known_model(config.model)) {
    return "unknown model \"" + config.model + "\"";
  }
  RepSpec spec;
  try {
    spec = parse_rep(config.rep);
  } catch (const std::exception& e) {
    return e.what();
  }
  if (config.model == "random" && spec.kind != RepSpec::Kind::none) {
    return "the random model takes no representation";
  }
  if (config.model == "panoptic" && spec.kind != RepSpec::Kind::none &&
      spec.kind != RepSpec::Kind::tfidf) {
    return "the panoptic model is defined on tf-idf only";
  }
  if ((config.model == "pre-agg" || config.model == "post-agg") &&
      (spec.kind == RepSpec::Kind::none || spec.kind == RepSpec::Kind::tfidf)) {
    return config.model + " needs --rep lsa:<dim> or external:<path>";
  }
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    return "--alpha must lie in (0, 1]";
  }
  return "";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Expert finding over document networks"};
  app.require_subcommand(1);
  app.set_config("--config");

  // validate
  std::filesystem::path validate_dir;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a dataset directory");
  validate_cmd->add_option("dataset", validate_dir, "Dataset directory")->required();

  // ingest-stackexchange
  IngestArgs ingest;
  CLI::App* ingest_cmd = app.add_subcommand(
      "ingest-stackexchange", "Build a dataset from a Posts.xml dump");
  ingest_cmd->add_option("--posts", ingest.posts_path, "Posts.xml path")->required();
  ingest_cmd->add_option("--out", ingest.out_dir, "Output dataset directory")
      ->required();
  ingest_cmd->add_option("--min-question-score", ingest.params.min_question_score,
                         "Keep questions with at least this score");
  ingest_cmd->add_option("--min-answer-score", ingest.params.min_answer_score,
                         "Required score of the qualifying answer");
  ingest_cmd->add_option("--min-tag-count", ingest.params.min_tag_count,
                         "Keep tags occurring at least this often");
  ingest_cmd->add_option("--expert-answer-score", ingest.params.expert_answer_score,
                         "Answer score that earns the question's tags");
  ingest_cmd->add_flag("--no-title{false}", ingest.params.include_title,
                       "Do not prepend question titles to their text");

  auto add_run_options = [](CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--dataset", config.dataset_path,
                    "Dataset directory (also searched under $EXPERTRANK_DATA)")
        ->required();
    cmd->add_option("--model", config.model,
                    "random|panoptic|voting|propagation|pre-agg|post-agg");
    cmd->add_option("--rep", config.rep, "tfidf | lsa:<dim> | external:<path>");
    cmd->add_option("--alpha", config.alpha, "Propagation restart probability");
    cmd->add_option("--tol", config.tol, "Propagation convergence tolerance");
    cmd->add_option("--max-iter", config.max_iter, "Propagation iteration cap");
    cmd->add_option("--seed", config.seed, "Random model seed");
    cmd->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
    cmd->add_flag("--exclude-query-authors", config.exclude_query_authors,
                  "Drop the query's own authors from its ranking");
  };

  // run
  RunConfig run_config;
  CLI::App* run_cmd = app.add_subcommand("run", "Evaluate a model on a dataset");
  add_run_options(run_cmd, run_config);
  run_cmd->add_option("--out", run_config.output_dir, "Directory for report files");
  run_cmd->add_flag("--json", run_config.write_json, "Also write report.json");
  run_cmd->add_flag("--suite", run_config.suite,
                    "Run the tf-idf baseline battery instead of --model");

  // roc
  RunConfig roc_config;
  std::filesystem::path roc_csv;
  CLI::App* roc_cmd = app.add_subcommand("roc", "Export an averaged ROC curve");
  add_run_options(roc_cmd, roc_config);
  roc_cmd->add_option("--out-csv", roc_csv, "Output CSV path")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("expertrank");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      return app.exit(e, out, err);
    }
    app.exit(e, out, err);
    return 2;
  }

  if (validate_cmd->parsed()) return cmd_validate(validate_dir, out, err);
  if (ingest_cmd->parsed()) return cmd_ingest(ingest, out, err);
  if (run_cmd->parsed()) {
    if (run_config.model.empty() && !run_config.suite) {
      err << "error: either --model or --suite is required\n";
      return 2;
    }
    return cmd_run(run_config, out, err);
  }
  if (roc_cmd->parsed()) {
    if (roc_config.model.empty()) {
      err << "error: --model is required\n";
      return 2;
    }
    return cmd_roc(roc_config, roc_csv, out, err);
  }
  err << "error: no subcommand given\n";
  return 2;
}

}  // namespace expertrank::cli
