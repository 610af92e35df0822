#ifndef CROWD_FIELD_HPP
#define CROWD_FIELD_HPP

#include <Eigen/Dense>

namespace crowd {

// Grid-aligned scalar field. Row index j runs along the corridor length
// (row 0 touches the exit side), column index i runs across the width.
template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ScalarField = Field<double>;
using Mask = Field<bool>;

struct Cell {
  int i = 0;  // column (across width)
  int j = 0;  // row (along length, 0 = exit row)

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Uniform square grid metadata. Cell (i, j) has its center at
// ((i + 1/2) h, (j + 1/2) h); the exit side is y = 0.
struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 0.0;

  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  bool contains(Cell c) const { return contains(c.i, c.j); }
  int index(Cell c) const { return c.j * nx + c.i; }
  Cell cell(int idx) const { return {idx % nx, idx / nx}; }
  int size() const { return nx * ny; }

  Eigen::Vector2d center(Cell c) const {
    return {(c.i + 0.5) * h, (c.j + 0.5) * h};
  }

  template <typename Scalar = double>
  Field<Scalar> zeros() const {
    return Field<Scalar>::Zero(ny, nx);
  }
  template <typename Scalar = double>
  Field<Scalar> constant(Scalar value) const {
    return Field<Scalar>::Constant(ny, nx, value);
  }
  Mask all_open() const { return Mask::Constant(ny, nx, true); }
};

}  // namespace crowd

#endif  // CROWD_FIELD_HPP
