// SPDX-License-Identifier: Apache-2.0
// Physical-space reference for the Darcy velocity and the species tendency.
//
// Samples are lifted to a grid refined by `factor` through direct
// trigonometric interpolation sums, differentiated there with 12th-order
// central differences. Poisson problems for the difference Laplacian are
// solved by diagonalizing it with direct DFT sums along each axis. Nothing
// here calls the FFT or the library's spectral operators.
#pragma once

#include <vector>

namespace oracle {

struct DenseGrid {
  int dim = 3;
  int n = 0;
  double h = 0.0;
  std::size_t size() const;
  std::size_t index(int i1, int i2, int i3) const;
};

using Values = std::vector<double>;

// Trigonometric interpolation of samples on an n^dim grid onto (factor n)^dim.
Values refine(const Values& coarse, int dim, int n, int factor);
// Every factor-th point of a refined field.
Values coarsen(const Values& dense, int dim, int n_dense, int factor);

Values derivative(const DenseGrid& g, const Values& f, int axis);
Values laplacian(const DenseGrid& g, const Values& f);
// Zero-mean solution of -Lap_h u = rhs - mean(rhs).
Values solve_poisson(const DenseGrid& g, const Values& rhs);

struct Reference {
  std::vector<Values> velocity;  // per axis, coarse points
  std::vector<Values> tendency;  // per species, coarse points
};

// c: species samples on the n^dim grid, body: rho_tilde samples.
Reference evaluate(const std::vector<Values>& c, const Values& body, const std::vector<double>& valences,
                   double diffusivity, int dim, int n, int factor = 2);

}  // namespace oracle
