#pragma once

#include <complex>
#include <vector>

#include "collapse/lattice.hpp"

namespace collapse::spectral {

using ComplexField = Eigen::VectorXcd;

/// Unnormalised forward DFT over the whole grid.
ComplexField forward(const LatticeGrid& grid, const SiteField& f);
ComplexField forward(const LatticeGrid& grid, ComplexField f);
/// Inverse DFT scaled by 1/M.
ComplexField inverse(const LatticeGrid& grid, ComplexField f);
/// Real part of the inverse DFT.
SiteField inverse_real(const LatticeGrid& grid, ComplexField f);

/// ifft(mult * fft(f)) for a real, mode-even multiplier.
SiteField apply_multiplier(const LatticeGrid& grid, const SiteField& f, const std::vector<double>& mult);

/// (dV/M) sum_k mult(k) Re(conj(F) G), the spectral form of dV sum_r f K[g].
double bilinear(const LatticeGrid& grid, const SiteField& f, const SiteField& g, const std::vector<double>& mult);

/// Spectral derivative along an axis. Complex so that the Nyquist mode keeps
/// its weight and Parseval holds exactly.
ComplexField gradient(const LatticeGrid& grid, const SiteField& f, int axis);

/// Periodic cross-correlation h(s) = dV sum_r f(r) g(r + s).
SiteField correlation(const LatticeGrid& grid, const SiteField& f, const SiteField& g);
/// Periodic convolution dV sum_s f(s) g(r - s).
SiteField convolution(const LatticeGrid& grid, const SiteField& f, const SiteField& g);

/// Field translated so that f(origin) moves to `site`: out(r) = f(r - site).
SiteField translate(const LatticeGrid& grid, const SiteField& f, std::size_t site);

}  // namespace collapse::spectral
