#include "expertrank/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "expertrank/error.hpp"

namespace expertrank {

namespace {

constexpr int kFormatVersion = 1;

std::string escape_tsv(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string unescape_tsv(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      ++i;
      switch (text[i]) {
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        default:
          out.push_back('\\');
          out.push_back(text[i]);
      }
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), 0, "cannot open file");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void check_stream(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out.good()) throw Error("write failed for " + path.string());
}

}  // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw LoadError(path.string(), 1, "empty file");
  ++line_no;
  std::istringstream banner(line);
  std::string magic, object, format, field, symmetry;
  banner >> magic >> object >> format >> field >> symmetry;
  if (magic != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
    throw LoadError(path.string(), 1, "expected a MatrixMarket coordinate header");
  }
  const bool pattern = field == "pattern";
  if (field != "integer" && field != "real" && !pattern) {
    throw LoadError(path.string(), 1, "unsupported field type \"" + field + "\"");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw LoadError(path.string(), 1, "unsupported symmetry \"" + symmetry + "\"");
  }

  std::size_t n_rows = 0, n_cols = 0, n_entries = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sizes(line);
    if (!(sizes >> n_rows >> n_cols >> n_entries)) {
      throw LoadError(path.string(), line_no, "malformed size line");
    }
    have_size = true;
    break;
  }
  if (!have_size) throw LoadError(path.string(), line_no, "missing size line");

  std::vector<Triplet> entries;
  entries.reserve(symmetric ? 2 * n_entries : n_entries);
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    std::size_t row = 0, col = 0;
    double value = 1.0;
    if (!(entry >> row >> col) || (!pattern && !(entry >> value))) {
      throw LoadError(path.string(), line_no, "malformed entry");
    }
    if (row < 1 || row > n_rows || col < 1 || col > n_cols) {
      throw LoadError(path.string(), line_no, "entry indices out of range");
    }
    entries.push_back({row - 1, col - 1, value});
    if (symmetric && row != col) entries.push_back({col - 1, row - 1, value});
    ++seen;
  }
  if (seen != n_entries) {
    throw LoadError(path.string(), line_no,
                    "expected " + std::to_string(n_entries) + " entries, found " +
                        std::to_string(seen));
  }
  try {
    return SparseMatrix::from_triplets(n_rows, n_cols, std::move(entries));
  } catch (const StructuralError& e) {
    throw LoadError(path.string(), 0, e.what());
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  bool integral = true;
  for (double v : m.values()) {
    if (v != std::floor(v) || v > 9.007199254740992e15) {
      integral = false;
      break;
    }
  }
  std::ofstream out = open_output(path);
  out << "%%MatrixMarket matrix coordinate " << (integral ? "integer" : "real")
      << " general\n";
  out << m.n_rows() << ' ' << m.n_cols() << ' ' << m.nnz() << '\n';
  out.precision(17);
  for (std::size_t row = 0; row < m.n_rows(); ++row) {
    auto cols = m.row_cols(row);
    auto vals = m.row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << row + 1 << ' ' << cols[k] + 1 << ' ';
      if (integral) out << static_cast<long long>(vals[k]);
      else out << vals[k];
      out << '\n';
    }
  }
  check_stream(out, path);
}

namespace {

std::vector<std::pair<std::string, std::string>> read_tsv_pairs(
    const std::filesystem::path& path, bool expect_second) {
  std::ifstream in = open_input(path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      if (expect_second) {
        throw LoadError(path.string(), line_no, "expected <id>\\t<value>");
      }
      rows.emplace_back(line, "");
    } else {
      rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
  }
  return rows;
}

std::vector<LabelSet> read_labels(const std::filesystem::path& path,
                                  const std::unordered_map<std::string, std::size_t>& ids,
                                  const std::unordered_map<std::string, std::uint32_t>& labels,
                                  std::size_t n_entities) {
  std::vector<LabelSet> out(n_entities);
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw LoadError(path.string(), line_no, "expected <id>\\t<labels>");
    }
    const std::string id = unescape_tsv(line.substr(0, tab));
    auto entity = ids.find(id);
    if (entity == ids.end()) {
      throw LoadError(path.string(), line_no, "unknown entity \"" + id + "\"");
    }
    LabelSet set;
    std::istringstream names(line.substr(tab + 1));
    std::string name;
    while (std::getline(names, name, ',')) {
      if (name.empty()) continue;
      auto label = labels.find(name);
      if (label == labels.end()) {
        throw LoadError(path.string(), line_no, "unknown label \"" + name + "\"");
      }
      set.push_back(label->second);
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    out[entity->second] = std::move(set);
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir, bool run_validate) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream manifest_in = open_input(manifest_path);
  nlohmann::json manifest;
  try {
    manifest_in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(manifest_path.string(), 0, e.what());
  }
  if (manifest.value("format_version", -1) != kFormatVersion) {
    throw LoadError(manifest_path.string(), 0, "unsupported format_version");
  }

  Dataset ds;
  for (const auto& name : manifest.at("label_names")) {
    ds.label_names.push_back(name.get<std::string>());
  }

  for (auto& [id, text] : read_tsv_pairs(dir / "documents.tsv", true)) {
    ds.documents.push_back({unescape_tsv(id), unescape_tsv(text)});
  }
  for (auto& [id, rest] : read_tsv_pairs(dir / "candidates.tsv", false)) {
    ds.candidates.push_back(unescape_tsv(id));
  }

  std::unordered_map<std::string, std::size_t> doc_ids;
  for (std::size_t d = 0; d < ds.documents.size(); ++d) {
    if (!doc_ids.emplace(ds.documents[d].id, d).second) {
      throw LoadError((dir / "documents.tsv").string(), d + 1,
                      "duplicate document id \"" + ds.documents[d].id + "\"");
    }
  }
  std::unordered_map<std::string, std::size_t> candidate_ids;
  for (std::size_t c = 0; c < ds.candidates.size(); ++c) {
    if (!candidate_ids.emplace(ds.candidates[c], c).second) {
      throw LoadError((dir / "candidates.tsv").string(), c + 1,
                      "duplicate candidate id \"" + ds.candidates[c] + "\"");
    }
  }
  std::unordered_map<std::string, std::uint32_t> label_ids;
  for (std::size_t l = 0; l < ds.label_names.size(); ++l) {
    label_ids.emplace(ds.label_names[l], static_cast<std::uint32_t>(l));
  }

  ds.a_dc = read_matrix_market(dir / "a_dc.mtx");
  ds.a_dd = read_matrix_market(dir / "a_dd.mtx");
  ds.doc_labels = read_labels(dir / "doc_labels.tsv", doc_ids, label_ids,
                              ds.documents.size());
  ds.candidate_labels = read_labels(dir / "candidate_labels.tsv", candidate_ids,
                                    label_ids, ds.candidates.size());

  {
    const auto path = dir / "queries.tsv";
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const std::string id = unescape_tsv(line);
      auto it = doc_ids.find(id);
      if (it == doc_ids.end()) {
        throw LoadError(path.string(), line_no, "unknown document \"" + id + "\"");
      }
      ds.queries.push_back(it->second);
    }
  }

  auto expect_count = [&](const char* key, std::size_t actual) {
    if (manifest.contains(key) && manifest.at(key).get<std::size_t>() != actual) {
      throw LoadError(manifest_path.string(), 0,
                      std::string(key) + " = " + manifest.at(key).dump() +
                          " does not match loaded count " + std::to_string(actual));
    }
  };
  expect_count("n_documents", ds.documents.size());
  expect_count("n_candidates", ds.candidates.size());
  expect_count("n_queries", ds.queries.size());

  if (run_validate) {
    ValidationReport violations = validate(ds);
    if (!violations.empty()) {
      std::string msg = "dataset fails validation:";
      for (const Violation& v : violations) {
        msg += " [" + v.where + "] " + v.message + ";";
      }
      throw LoadError(dir.string(), 0, msg);
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  for (const std::string& name : dataset.label_names) {
    if (name.find_first_of(",\t\n") != std::string::npos) {
      throw Error("label name \"" + name + "\" cannot be stored (holds , tab or newline)");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  {
    nlohmann::json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["n_documents"] = dataset.documents.size();
    manifest["n_candidates"] = dataset.candidates.size();
    manifest["n_labels"] = dataset.label_names.size();
    manifest["n_queries"] = dataset.queries.size();
    manifest["label_names"] = dataset.label_names;
    const auto path = dir / "manifest.json";
    std::ofstream out = open_output(path);
    out << manifest.dump(2) << '\n';
    check_stream(out, path);
  }
  {
    const auto path = dir / "documents.tsv";
    std::ofstream out = open_output(path);
    for (const Document& doc : dataset.documents) {
      out << escape_tsv(doc.id) << '\t' << escape_tsv(doc.text) << '\n';
    }
    check_stream(out, path);
  }
  {
    const auto path = dir / "candidates.tsv";
    std::ofstream out = open_output(path);
    for (const std::string& id : dataset.candidates) out << escape_tsv(id) << '\n';
    check_stream(out, path);
  }
  write_matrix_market(dir / "a_dc.mtx", dataset.a_dc);
  write_matrix_market(dir / "a_dd.mtx", dataset.a_dd);

  auto write_labels = [&](const std::filesystem::path& path,
                          const std::vector<LabelSet>& labels,
                          auto&& id_of) {
    std::ofstream out = open_output(path);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].empty()) continue;
      out << escape_tsv(id_of(i)) << '\t';
      for (std::size_t k = 0; k < labels[i].size(); ++k) {
        if (k > 0) out << ',';
        out << dataset.label_names.at(labels[i][k]);
      }
      out << '\n';
    }
    check_stream(out, path);
  };
  write_labels(dir / "doc_labels.tsv", dataset.doc_labels,
               [&](std::size_t i) { return dataset.documents[i].id; });
  write_labels(dir / "candidate_labels.tsv", dataset.candidate_labels,
               [&](std::size_t i) { return dataset.candidates[i]; });

  {
    const auto path = dir / "queries.tsv";
    std::ofstream out = open_output(path);
    for (std::size_t q : dataset.queries) {
      out << escape_tsv(dataset.documents.at(q).id) << '\n';
    }
    check_stream(out, path);
  }
}

}  // namespace expertrank
