#include "expertrank/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "expertrank/error.hpp"

namespace expertrank {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols), row_offsets_(n_rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw StructuralError("triplet (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") outside " +
                            std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
    if (!std::isfinite(t.value) || t.value < 0.0) {
      throw StructuralError("matrix values must be finite and nonnegative");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m(n_rows, n_cols);
  m.col_indices_.reserve(entries.size());
  m.values_.reserve(entries.size());
  std::size_t i = 0;
  for (std::size_t row = 0; row < n_rows; ++row) {
    while (i < entries.size() && entries[i].row == row) {
      double value = entries[i].value;
      std::size_t col = entries[i].col;
      ++i;
      while (i < entries.size() && entries[i].row == row && entries[i].col == col) {
        value += entries[i].value;
        ++i;
      }
      if (value != 0.0) {
        m.col_indices_.push_back(static_cast<std::uint32_t>(col));
        m.values_.push_back(value);
      }
    }
    m.row_offsets_[row + 1] = m.col_indices_.size();
  }
  return m;
}

std::span<const std::uint32_t> SparseMatrix::row_cols(std::size_t row) const {
  return {col_indices_.data() + row_offsets_[row],
          col_indices_.data() + row_offsets_[row + 1]};
}

std::span<const double> SparseMatrix::row_values(std::size_t row) const {
  return {values_.data() + row_offsets_[row], values_.data() + row_offsets_[row + 1]};
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  auto cols = row_cols(row);
  auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(col));
  if (it == cols.end() || *it != col) return 0.0;
  return values_[row_offsets_[row] + static_cast<std::size_t>(it - cols.begin())];
}

double SparseMatrix::row_sum(std::size_t row) const {
  double sum = 0.0;
  for (double v : row_values(row)) sum += v;
  return sum;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(n_cols_, n_rows_);
  t.col_indices_.resize(nnz());
  t.values_.resize(nnz());

  std::vector<std::size_t> counts(n_cols_ + 1, 0);
  for (std::uint32_t c : col_indices_) ++counts[c + 1];
  for (std::size_t c = 0; c < n_cols_; ++c) counts[c + 1] += counts[c];
  t.row_offsets_ = counts;

  // Scanning source rows in order keeps each output row column-sorted.
  std::vector<std::size_t> next(counts.begin(), counts.end() - 1);
  for (std::size_t row = 0; row < n_rows_; ++row) {
    for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) {
      std::size_t pos = next[col_indices_[k]]++;
      t.col_indices_[pos] = static_cast<std::uint32_t>(row);
      t.values_[pos] = values_[k];
    }
  }
  return t;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& rhs) const {
  if (n_cols_ != rhs.n_rows_) {
    throw StructuralError("multiply: inner dimensions " + std::to_string(n_cols_) +
                          " and " + std::to_string(rhs.n_rows_) + " differ");
  }
  SparseMatrix out(n_rows_, rhs.n_cols_);
  std::vector<double> acc(rhs.n_cols_, 0.0);
  std::vector<char> seen(rhs.n_cols_, 0);
  std::vector<std::uint32_t> touched;

  for (std::size_t row = 0; row < n_rows_; ++row) {
    touched.clear();
    auto cols = row_cols(row);
    auto vals = row_values(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto rcols = rhs.row_cols(cols[k]);
      auto rvals = rhs.row_values(cols[k]);
      for (std::size_t j = 0; j < rcols.size(); ++j) {
        if (!seen[rcols[j]]) {
          seen[rcols[j]] = 1;
          touched.push_back(rcols[j]);
        }
        acc[rcols[j]] += vals[k] * rvals[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t c : touched) {
      if (acc[c] != 0.0) {
        out.col_indices_.push_back(c);
        out.values_.push_back(acc[c]);
      }
      acc[c] = 0.0;
      seen[c] = 0;
    }
    out.row_offsets_[row + 1] = out.col_indices_.size();
  }
  return out;
}

namespace {

template <typename Merge>
SparseMatrix merge_rows(const SparseMatrix& a, const SparseMatrix& b, Merge merge,
                        const char* op) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) {
    throw StructuralError(std::string(op) + ": shapes differ");
  }
  std::vector<Triplet> entries;
  entries.reserve(a.nnz() + b.nnz());
  for (std::size_t row = 0; row < a.n_rows(); ++row) {
    auto ac = a.row_cols(row);
    auto av = a.row_values(row);
    auto bc = b.row_cols(row);
    auto bv = b.row_values(row);
    std::size_t i = 0, j = 0;
    while (i < ac.size() || j < bc.size()) {
      if (j == bc.size() || (i < ac.size() && ac[i] < bc[j])) {
        entries.push_back({row, ac[i], merge(av[i], 0.0)});
        ++i;
      } else if (i == ac.size() || bc[j] < ac[i]) {
        entries.push_back({row, bc[j], merge(0.0, bv[j])});
        ++j;
      } else {
        entries.push_back({row, ac[i], merge(av[i], bv[j])});
        ++i;
        ++j;
      }
    }
  }
  return SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(entries));
}

}  // namespace

SparseMatrix SparseMatrix::add(const SparseMatrix& rhs) const {
  return merge_rows(*this, rhs, [](double x, double y) { return x + y; }, "add");
}

SparseMatrix SparseMatrix::max_with(const SparseMatrix& rhs) const {
  return merge_rows(*this, rhs, [](double x, double y) { return std::max(x, y); },
                    "max_with");
}

bool SparseMatrix::is_symmetric() const {
  if (n_rows_ != n_cols_) return false;
  return *this == transpose();
}

SparseMatrix symmetrized(const SparseMatrix& m) {
  if (m.n_rows() != m.n_cols()) {
    throw StructuralError("symmetrized: matrix is not square");
  }
  return m.max_with(m.transpose());
}

}  // namespace expertrank
