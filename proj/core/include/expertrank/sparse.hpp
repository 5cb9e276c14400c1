#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace expertrank {

// Coordinate entry used to assemble sparse matrices.
struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Immutable CSR matrix with nonnegative, finite values.
///
/// Within each row the stored columns are strictly increasing, so there are
/// no duplicate (row, col) pairs. Zero-valued entries are never stored.
/// Instances are safe to share across threads.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // All-zero matrix of the given shape.
  SparseMatrix(std::size_t n_rows, std::size_t n_cols);

  // Builds from coordinates; duplicate (row, col) pairs are summed and
  // explicit zeros dropped. Throws StructuralError on out-of-range indices
  // or negative / non-finite values.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> entries);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::uint32_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  // One row as parallel (column, value) spans.
  std::span<const std::uint32_t> row_cols(std::size_t row) const;
  std::span<const double> row_values(std::size_t row) const;

  double at(std::size_t row, std::size_t col) const;  // 0.0 when absent
  double row_sum(std::size_t row) const;

  SparseMatrix transpose() const;

  // this (m×k) times rhs (k×n). Throws StructuralError on inner mismatch.
  SparseMatrix multiply(const SparseMatrix& rhs) const;

  // Elementwise sum / max; shapes must match.
  SparseMatrix add(const SparseMatrix& rhs) const;
  SparseMatrix max_with(const SparseMatrix& rhs) const;

  bool is_symmetric() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_ = {0};
  std::vector<std::uint32_t> col_indices_;
  std::vector<double> values_;
};

// max(A, A^T): undirected view of a possibly directed square matrix.
SparseMatrix symmetrized(const SparseMatrix& m);

}  // namespace expertrank
