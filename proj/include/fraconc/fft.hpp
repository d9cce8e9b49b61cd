#pragma once

#include <complex>
#include <vector>

namespace fraconc {

// In-place radix-2 complex FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n);

}  // namespace fraconc
