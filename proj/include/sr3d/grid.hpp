#ifndef SR3D_GRID_HPP_
#define SR3D_GRID_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace sr3d {

/// Minimal dense row-major matrix of doubles (scores, gradients, Jacobians).
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {v_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {v_.data() + r * cols_, cols_};
  }
  std::span<double> flat() { return v_; }
  std::span<const double> flat() const { return v_; }
  void fill(double value) { v_.assign(v_.size(), value); }

  bool operator==(const Grid2& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

}  // namespace sr3d

#endif  // SR3D_GRID_HPP_
