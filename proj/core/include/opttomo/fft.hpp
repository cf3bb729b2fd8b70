#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace opttomo {

// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 transform; a.size() must be a power of two.
// The inverse applies the 1/n scale.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

}  // namespace opttomo
