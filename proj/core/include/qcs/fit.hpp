#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qcs {

struct FitResult {
  std::vector<double> params;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

using FitModel = std::function<double(double x, const std::vector<double>& p)>;

// Levenberg-Marquardt with a numeric Jacobian. Returns converged = false
// rather than throwing when the iteration stalls; callers treat a failed
// fit as a data point, not an error.
FitResult fit_least_squares(const std::vector<double>& x,
                            const std::vector<double>& y, const FitModel& model,
                            std::vector<double> initial, int max_iterations = 200);

// y = a * cos(2 pi f x + phi) * exp(-(x / t2)^2) + c
// params: [a, f, phi, t2, c]. The frequency guess comes from a
// zero-padded periodogram of the detrended data; t2 starts at half the
// x span.
FitResult fit_decaying_cosine(const std::vector<double>& x,
                              const std::vector<double>& y);

// y = a * exp(-x / t) + c, params [a, t, c]. Guesses: c from the tail
// mean, a from the first point, t from a third of the span.
FitResult fit_exponential_decay(const std::vector<double>& x,
                                const std::vector<double>& y);

// y = a * sin^2(pi f x) + c, params [a, f, c]. The frequency guess comes
// from the periodogram (sin^2 oscillates at f after detrending).
FitResult fit_rabi_sin2(const std::vector<double>& x,
                        const std::vector<double>& y);

double eval_decaying_cosine(double x, const std::vector<double>& p);
double eval_exponential_decay(double x, const std::vector<double>& p);
double eval_rabi_sin2(double x, const std::vector<double>& p);

}  // namespace qcs
