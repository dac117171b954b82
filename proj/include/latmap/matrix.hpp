#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "latmap/rational.hpp"

namespace latmap {

struct ReducedRowEchelon;

// Row-sparse exact matrix. Rows hold (column, value) pairs sorted by column
// with no explicit zeros. All elimination is deterministic: pivots are chosen
// by scanning columns in order and taking the first candidate row, so equal
// inputs always produce identical reduced forms, kernels and solutions.
class RationalMatrix {
 public:
  using SparseRow = std::vector<std::pair<int, Rational>>;

  RationalMatrix(int rows, int cols) : cols_(cols), rows_(rows) {}

  int row_count() const { return static_cast<int>(rows_.size()); }
  int col_count() const { return cols_; }

  Rational at(int r, int c) const {
    const SparseRow& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c, by_column);
    return (it != row.end() && it->first == c) ? it->second : Rational(0);
  }

  void set(int r, int c, const Rational& v) {
    SparseRow& row = rows_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c, by_column);
    if (it != row.end() && it->first == c) {
      if (v == 0)
        row.erase(it);
      else
        it->second = v;
    } else if (v != 0) {
      row.insert(it, {c, v});
    }
  }

  void add_at(int r, int c, const Rational& v) { set(r, c, at(r, c) + v); }

  const SparseRow& row(int r) const { return rows_[r]; }

  ReducedRowEchelon reduced_row_echelon() const;
  int rank() const;

 private:
  friend struct ReducedRowEchelon;
  static bool by_column(const std::pair<int, Rational>& e, int c) {
    return e.first < c;
  }

  static Rational value_at(const SparseRow& row, int c) {
    auto it = std::lower_bound(row.begin(), row.end(), c, by_column);
    return (it != row.end() && it->first == c) ? it->second : Rational(0);
  }

  static void scale_row(SparseRow& row, const Rational& f) {
    for (auto& [c, v] : row) v *= f;
  }

  // row += f * other, merging the sorted supports.
  static void axpy(SparseRow& row, const Rational& f, const SparseRow& other) {
    SparseRow merged;
    merged.reserve(row.size() + other.size());
    auto a = row.begin();
    auto b = other.begin();
    while (a != row.end() && b != other.end()) {
      if (a->first < b->first) {
        merged.push_back(*a++);
      } else if (b->first < a->first) {
        merged.push_back({b->first, f * b->second});
        ++b;
      } else {
        Rational v = a->second + f * b->second;
        if (v != 0) merged.push_back({a->first, std::move(v)});
        ++a, ++b;
      }
    }
    merged.insert(merged.end(), a, row.end());
    for (; b != other.end(); ++b) merged.push_back({b->first, f * b->second});
    row = std::move(merged);
  }

  int cols_;
  std::vector<SparseRow> rows_;
};

struct ReducedRowEchelon {
  RationalMatrix matrix;           // zero rows last
  std::vector<int> pivot_columns;  // ascending; one per nonzero row
};

inline ReducedRowEchelon RationalMatrix::reduced_row_echelon() const {
  std::vector<SparseRow> work = rows_;
  std::vector<int> pivots;
  int placed = 0;
  for (int col = 0; col < cols_ && placed < row_count(); ++col) {
    int found = -1;
    // Rows below `placed` have all columns < col eliminated, so a nonzero
    // entry at col can only sit at the front.
    for (int r = placed; r < row_count(); ++r) {
      if (!work[r].empty() && work[r].front().first == col) {
        found = r;
        break;
      }
    }
    if (found < 0) continue;
    std::swap(work[placed], work[found]);
    scale_row(work[placed], Rational(1) / work[placed].front().second);
    for (int r = 0; r < row_count(); ++r) {
      if (r == placed) continue;
      Rational f = value_at(work[r], col);
      if (f != 0) axpy(work[r], -f, work[placed]);
    }
    pivots.push_back(col);
    ++placed;
  }
  ReducedRowEchelon out{RationalMatrix(row_count(), cols_), std::move(pivots)};
  out.matrix.rows_ = std::move(work);
  return out;
}

inline int RationalMatrix::rank() const {
  return static_cast<int>(reduced_row_echelon().pivot_columns.size());
}

// Basis of {x : Mx = 0}, one vector per free column, ordered by free column
// index. The free column's own coordinate is 1.
inline std::vector<std::vector<Rational>> nullspace(const RationalMatrix& m) {
  auto red = m.reduced_row_echelon();
  std::vector<bool> is_pivot(m.col_count(), false);
  for (int c : red.pivot_columns) is_pivot[c] = true;
  std::vector<std::vector<Rational>> basis;
  for (int free = 0; free < m.col_count(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(m.col_count(), Rational(0));
    v[free] = 1;
    for (int r = 0; r < static_cast<int>(red.pivot_columns.size()); ++r)
      v[red.pivot_columns[r]] = -red.matrix.at(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

// One solution of Mx = rhs with all free coordinates zero, or nullopt when
// the system is inconsistent.
inline std::optional<std::vector<Rational>> solve_particular(
    const RationalMatrix& m, const std::vector<Rational>& rhs) {
  RationalMatrix aug(m.row_count(), m.col_count() + 1);
  for (int r = 0; r < m.row_count(); ++r) {
    for (const auto& [c, v] : m.row(r)) aug.set(r, c, v);
    aug.set(r, m.col_count(), rhs[r]);
  }
  auto red = aug.reduced_row_echelon();
  std::vector<Rational> x(m.col_count(), Rational(0));
  for (int r = 0; r < static_cast<int>(red.pivot_columns.size()); ++r) {
    if (red.pivot_columns[r] == m.col_count()) return std::nullopt;
    x[red.pivot_columns[r]] = red.matrix.at(r, m.col_count());
  }
  return x;
}

}  // namespace latmap
