#pragma once
// Thin wrapper over FFTW. Plans are created once per (kind, size) under a
// lock and executed through the new-array interface, so transforms are safe
// to call from several threads.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pulsegate::fft {

using Complex = std::complex<double>;

/// One-sided DFT of x zero-padded to nfft (nfft >= x.size()); nfft/2 + 1 bins.
std::vector<Complex> rfft(std::span<const double> x, std::size_t nfft);

/// Hermitian half-spectrum back to nfft real samples, without the 1/nfft factor:
/// out[n] = Re(X0) + 2 Re(sum_{0<k<nfft/2} X_k e^{+i 2 pi k n / nfft}) + X_{nfft/2} (-1)^n for even nfft.
std::vector<double> irfft_unnormalized(std::span<const Complex> half, std::size_t nfft);

/// Full complex DFT, forward (e^{-i...}) or backward (e^{+i...}); unnormalized.
std::vector<Complex> dft(std::span<const Complex> x, bool inverse);

}  // namespace pulsegate::fft
