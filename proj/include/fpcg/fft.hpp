#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fpcg {

using cdouble = std::complex<double>;

/// One-sided DFT of a real sequence zero-padded to `nfft` (0 = x.size()).
/// Returns nfft/2 + 1 bins, unnormalized.
std::vector<cdouble> rfft(std::span<const double> x, std::size_t nfft = 0);

/// Inverse of rfft for a length-n real sequence, normalized by 1/n.
std::vector<double> irfft(std::span<const cdouble> spectrum, std::size_t n);

/// Full complex DFT (forward, unnormalized) and its normalized inverse.
std::vector<cdouble> fft(std::span<const cdouble> x);
std::vector<cdouble> ifft(std::span<const cdouble> x);

/// Smallest 2^a 3^b 5^c >= n.
std::size_t next_fast_size(std::size_t n);

/// Analytic signal x + i H{x} via the one-sided spectrum.
std::vector<cdouble> analytic_signal(std::span<const double> x);

/// |analytic_signal(x)|
std::vector<double> hilbert_envelope(std::span<const double> x);

/// Linear convolution, full length x.size() + h.size() - 1.
std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h);
std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h);

}  // namespace fpcg
