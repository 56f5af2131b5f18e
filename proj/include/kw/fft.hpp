#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kw {

using Complex = std::complex<double>;

/// Half spectrum of a real N x N grid: index i * (N/2 + 1) + j holds the
/// coefficient of exp(2πi(m x/Lx + n y/Ly)) with m = i (i < N/2) or i - N,
/// and n = j in [0, N/2]. Coefficients are normalized so that the grid value
/// is the plain sum over the full spectrum.
struct HalfSpectrum {
  int n = 0;
  std::vector<Complex> data;

  HalfSpectrum() = default;
  explicit HalfSpectrum(int size)
      : n(size), data(static_cast<std::size_t>(size) * (size / 2 + 1)) {}

  int columns() const { return n / 2 + 1; }
  Complex& at(int i, int j) { return data[static_cast<std::size_t>(i) * columns() + j]; }
  const Complex& at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * columns() + j];
  }
  /// Signed x wavenumber of row i.
  int wave_m(int i) const { return i <= n / 2 ? i : i - n; }
  bool is_nyquist(int i, int j) const { return i == n / 2 || j == n / 2; }
  /// Multiplicity of a stored coefficient in the full spectrum (1 or 2).
  double weight(int j) const { return (j == 0 || j == n / 2) ? 1.0 : 2.0; }
};

/// Forward transform of x-major samples, normalized by 1/N².
HalfSpectrum forward_fft(std::span<const double> grid, int n);

/// Inverse transform back to x-major samples on an N x N grid.
std::vector<double> inverse_fft(const HalfSpectrum& spectrum);

/// Zero-pads (or truncates) a spectrum to a grid of size `target`. Nyquist
/// content of the source is dropped.
HalfSpectrum resize_spectrum(const HalfSpectrum& spectrum, int target);

}  // namespace kw
