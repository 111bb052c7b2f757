#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qcs {

// Forward DFT (FFTW). Input length is arbitrary but powers of two are
// fastest; bin k corresponds to k * sample_rate / N with negative
// frequencies in the upper half.
std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& in);

// Per-bin power in dBFS for a complex baseband stream: a full-scale
// complex exponential lands at 0 dBFS in its bin.
std::vector<double> power_spectrum_db(const std::vector<std::complex<double>>& in);

// Largest bin by power. Bins listed in `exclude` (e.g. a known carrier
// and DC) are skipped.
int peak_bin(const std::vector<double>& power_db, const std::vector<int>& exclude = {});

// Wraps a signed bin offset into [0, n).
int wrap_bin(int bin, int n);

// Sub-bin tone frequency by least-squares fit to the unwrapped phase of
// the analytic I/Q sequence. For a clean NCO tone this resolves far below
// one DFT bin; quantization noise averages down with length.
double estimate_tone_frequency_hz(std::span<const double> i, std::span<const double> q,
                                  double sample_rate_hz);

std::vector<std::complex<double>> to_complex(std::span<const double> i,
                                             std::span<const double> q);
std::vector<std::complex<double>> to_complex(std::span<const int16_t> i,
                                             std::span<const int16_t> q);

}  // namespace qcs
