// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "npd/field.hpp"

// Fourier-side operators on periodic fields.
namespace npd::spectral {

SpectralField forward(const RealField& f);
RealField inverse(const SpectralField& f);
SpectralVector forward(const VectorField& v);
VectorField inverse(const SpectralVector& v);

// Component j carries i k_j fhat(k). Nyquist wavenumbers differentiate to 0.
SpectralVector gradient(const SpectralField& f);
SpectralField divergence(const SpectralVector& v);

// Multiplies by -|k|^2.
SpectralField laplacian(const SpectralField& f);

// Solves -Delta u = f with uhat(0) = 0. Throws NonNeutralSource when the
// mean of f exceeds 1e-10 of its L2 norm.
SpectralField inverse_laplacian(const SpectralField& f);

// 2/3 rule: zeroes every mode with some |k_j| > floor(n/3).
SpectralField dealias(const SpectralField& f);
void dealias_in_place(SpectralField& f);

// Restores exact conjugate symmetry on the self-conjugate planes of the half
// spectrum (k1 = 0 and k1 = n/2) by averaging each pair.
void hermitian_symmetrize(SpectralField& f);

enum class SobolevKind {
  Homogeneous,  // multiplier |k|^{2s}, mean mode excluded for s > 0
  Full,         // multiplier (1 + |k|^2)^s
};

// ((2 pi)^d sum_k m_s(k) |fhat(k)|^2)^{1/2}; s = 0 is the L2 norm.
double sobolev_norm(const SpectralField& f, double s, SobolevKind kind = SobolevKind::Homogeneous);

double l2_norm(const SpectralField& f);
// Grid quadrature ((2 pi / n)^d sum |f|^p)^{1/p}.
double lp_norm(const RealField& f, int p, double shift = 0.0);

// Inner product of the species space H^1 x ... x H^1:
//   sum_i (2 pi)^d sum_k (1 + |k|^2) Re(a_i(k) conj(b_i(k))).
double v_inner(std::span<const SpectralField> a, std::span<const SpectralField> b);
double v_norm(std::span<const SpectralField> a);

// Zero-pads or truncates the spectrum onto another grid of the same dimension.
SpectralField resample(const SpectralField& f, const SpectralGrid& target);

}  // namespace npd::spectral
