#include "kw/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace kw {

namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Plan creation in FFTW is not thread-safe; execution with the new-array
// interface is. FFTW_ESTIMATE keeps the chosen algorithm, and therefore every
// output bit, independent of timing.
const Plans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> real(static_cast<std::size_t>(n) * n);
  std::vector<Complex> cplx(static_cast<std::size_t>(n) * (n / 2 + 1));
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  Plans p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.forward = fftw_plan_dft_r2c_2d(n, n, real.data(), c, flags);
  p.inverse = fftw_plan_dft_c2r_2d(n, n, c, real.data(), flags | FFTW_DESTROY_INPUT);
  if (!p.forward || !p.inverse) throw std::runtime_error("FFTW planning failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace

HalfSpectrum forward_fft(std::span<const double> grid, int n) {
  if (grid.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("forward_fft: shape mismatch");
  }
  HalfSpectrum out(n);
  std::vector<double> in(grid.begin(), grid.end());
  fftw_execute_dft_r2c(plans_for(n).forward, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data.data()));
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& c : out.data) c *= scale;
  return out;
}

std::vector<double> inverse_fft(const HalfSpectrum& spectrum) {
  const int n = spectrum.n;
  std::vector<Complex> work = spectrum.data;
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  fftw_execute_dft_c2r(plans_for(n).inverse,
                       reinterpret_cast<fftw_complex*>(work.data()), out.data());
  return out;
}

HalfSpectrum resize_spectrum(const HalfSpectrum& spectrum, int target) {
  HalfSpectrum out(target);
  const int limit = std::min(spectrum.n, target) / 2;
  for (int i = 0; i < spectrum.n; ++i) {
    const int m = spectrum.wave_m(i);
    if (m >= limit || m <= -limit) continue;
    const int ti = m >= 0 ? m : m + target;
    for (int j = 0; j < limit; ++j) out.at(ti, j) = spectrum.at(i, j);
  }
  return out;
}

}  // namespace kw
