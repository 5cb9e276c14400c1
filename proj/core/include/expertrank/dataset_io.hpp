#pragma once

#include <filesystem>
#include <iosfwd>

#include "expertrank/dataset.hpp"

namespace expertrank {

// MatrixMarket coordinate format (integer, real, or pattern; general or
// symmetric). Throws LoadError with file and line context.
SparseMatrix read_matrix_market(const std::filesystem::path& path);

// Writes coordinate/general; integer field when every value is integral.
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);

/// Dataset directory layout: manifest.json, documents.tsv, candidates.tsv,
/// a_dc.mtx, a_dd.mtx, doc_labels.tsv, candidate_labels.tsv, queries.tsv.
/// TSV text fields escape tab, newline, and backslash as \t, \n, \\.
Dataset load_dataset(const std::filesystem::path& dir, bool run_validate = true);

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace expertrank
