#pragma once

#include <hpda/error.hpp>

#include <cstddef>
#include <vector>

namespace hpda {

// Dense row-major rectangular array.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Throws PreconditionError on ragged input.
  static Grid from_rows(const std::vector<std::vector<T>>& rows) {
    Grid g(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      require(rows[r].size() == g.cols_, "ragged grid at row " + std::to_string(r + 1));
      for (std::size_t c = 0; c < g.cols_; ++c) g(r, c) = rows[r][c];
    }
    return g;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace hpda
