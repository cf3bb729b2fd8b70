#include "opttomo/recon.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "opttomo/errors.hpp"
#include "opttomo/fft.hpp"

namespace opttomo {

namespace {

// Closed-form spatial ramp kernel at integer offset k, sample spacing ds:
// 1/(4 ds^2) at k = 0, 0 for even k, -1/(pi^2 k^2 ds^2) for odd k.
double ramp_kernel(std::ptrdiff_t k, double ds) {
  if (k == 0) return 1.0 / (4.0 * ds * ds);
  if (k % 2 == 0) return 0.0;
  const double pk = std::numbers::pi * static_cast<double>(k) * ds;
  return -1.0 / (pk * pk);
}

}  // namespace

std::vector<double> ramp_filter_gain(std::size_t n_s, double ds,
                                     FilterKind kind) {
  if (n_s < 2) fail(errc::data_error, "filtering needs at least 2 radial samples");
  if (!(ds > 0)) fail(errc::data_error, "radial spacing must be positive");

  const std::size_t n_pad = next_pow2(2 * n_s);

  // Circular arrangement of the truncated kernel, then its DFT.
  std::vector<std::complex<double>> response(n_pad);
  for (std::size_t j = 0; j < n_pad; ++j) {
    const std::ptrdiff_t k =
        j <= n_pad / 2 ? static_cast<std::ptrdiff_t>(j)
                       : static_cast<std::ptrdiff_t>(j) -
                             static_cast<std::ptrdiff_t>(n_pad);
    response[j] = ramp_kernel(k, ds);
  }
  fft(response);

  std::vector<double> gain(n_pad);
  for (std::size_t j = 0; j < n_pad; ++j) gain[j] = response[j].real();
  gain[0] = 0.0;  // exact null at DC; air must reconstruct to zero

  if (kind == FilterKind::ramp_hann) {
    for (std::size_t j = 0; j < n_pad; ++j) {
      const double cycles =
          static_cast<double>(j) / static_cast<double>(n_pad);
      const double w = std::cos(std::numbers::pi * cycles);
      gain[j] *= w * w;  // Hann taper, zero at Nyquist
    }
  }
  return gain;
}

ParallelSinogram ramp_filter(const ParallelSinogram& sinogram, FilterKind kind) {
  const double ds = sinogram.ds();
  const std::size_t n_s = sinogram.n_s;
  const std::vector<double> gain = ramp_filter_gain(n_s, ds, kind);
  const std::size_t n_pad = gain.size();

  ParallelSinogram out = sinogram;
  std::vector<std::complex<double>> work(n_pad);
  for (std::size_t k = 0; k < sinogram.n_views; ++k) {
    for (std::size_t i = 0; i < n_pad; ++i) {
      work[i] = i < n_s ? sinogram.at(k, i) : 0.0;
    }
    fft(work);
    for (std::size_t i = 0; i < n_pad; ++i) work[i] *= gain[i];
    fft(work, true);
    for (std::size_t i = 0; i < n_s; ++i)
      out.values[k * n_s + i] = work[i].real() * ds;
  }
  return out;
}

}  // namespace opttomo
