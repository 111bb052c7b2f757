#include "qcs/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qcs/common.hpp"
#include "qcs/spectrum.hpp"

namespace qcs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Returns false on a (near) singular system.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    for (int r = 0; r < col; ++r) {
      b[r] -= a[r][col] / a[col][col] * b[col];
      a[r][col] = 0.0;
    }
    b[col] /= a[col][col];
  }
  return true;
}

double residual_sum(const std::vector<double>& x, const std::vector<double>& y,
                    const FitModel& model, const std::vector<double>& p) {
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - model(x[i], p);
    rss += r * r;
  }
  return rss;
}

}  // namespace

FitResult fit_least_squares(const std::vector<double>& x,
                            const std::vector<double>& y, const FitModel& model,
                            std::vector<double> initial, int max_iterations) {
  if (x.size() != y.size()) throw LengthMismatch("fit data length mismatch");
  const std::size_t n = x.size();
  const std::size_t np = initial.size();
  FitResult res;
  res.params = std::move(initial);
  if (n < np) return res;

  double lambda = 1e-3;
  double rss = residual_sum(x, y, model, res.params);

  std::vector<std::vector<double>> jac(n, std::vector<double>(np));
  for (int iter = 0; iter < max_iterations; ++iter) {
    res.iterations = iter + 1;
    for (std::size_t j = 0; j < np; ++j) {
      const double h = std::max(1e-9, 1e-6 * std::fabs(res.params[j]));
      auto plus = res.params;
      auto minus = res.params;
      plus[j] += h;
      minus[j] -= h;
      for (std::size_t i = 0; i < n; ++i)
        jac[i][j] = (model(x[i], plus) - model(x[i], minus)) / (2.0 * h);
    }

    std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
    std::vector<double> jtr(np, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - model(x[i], res.params);
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += jac[i][a] * r;
        for (std::size_t b = a; b < np; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      auto a_mat = jtj;
      auto rhs = jtr;
      for (std::size_t d = 0; d < np; ++d)
        a_mat[d][d] += lambda * std::max(jtj[d][d], 1e-12);
      if (!solve_linear(a_mat, rhs)) {
        lambda *= 10.0;
        continue;
      }
      auto trial = res.params;
      for (std::size_t d = 0; d < np; ++d) trial[d] += rhs[d];
      const double trial_rss = residual_sum(x, y, model, trial);
      if (trial_rss < rss) {
        const double gain = rss - trial_rss;
        res.params = std::move(trial);
        rss = trial_rss;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (gain < 1e-14 * (1.0 + rss)) {
          res.rss = rss;
          res.converged = true;
          return res;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) {
      res.rss = rss;
      res.converged = rss < 1e-20 || iter > 0;
      return res;
    }
  }
  res.rss = rss;
  res.converged = true;
  return res;
}

double eval_decaying_cosine(double x, const std::vector<double>& p) {
  const double decay = p[3] != 0.0 ? std::exp(-(x / p[3]) * (x / p[3])) : 1.0;
  return p[0] * std::cos(kTwoPi * p[1] * x + p[2]) * decay + p[4];
}

double eval_exponential_decay(double x, const std::vector<double>& p) {
  return p[0] * std::exp(p[1] != 0.0 ? -x / p[1] : 0.0) + p[2];
}

FitResult fit_decaying_cosine(const std::vector<double>& x,
                              const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 6)
    throw LengthMismatch("need at least 6 samples to fit");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double amp = 0.5 * (*mx - *mn);

  // Frequency guess from a zero-padded periodogram over the uniform grid.
  const std::size_t pad = std::max<std::size_t>(256, x.size() * 8);
  std::vector<std::complex<double>> z(pad, {0.0, 0.0});
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = {y[i] - mean, 0.0};
  const auto spec = dft(z);
  std::size_t best = 1;
  double best_mag = 0.0;
  for (std::size_t k = 1; k < pad / 2; ++k) {
    const double mag = std::abs(spec[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  const double f0 = static_cast<double>(best) / (static_cast<double>(pad) * dx);
  const double span = x.back() - x.front();

  FitResult out;
  double best_rss = 1e300;
  // The phase is the one guess a periodogram cannot give; try a few.
  for (double phi0 : {0.0, M_PI / 2, M_PI, -M_PI / 2}) {
    auto fit = fit_least_squares(x, y, eval_decaying_cosine,
                                 {amp, f0, phi0, 0.5 * span, mean});
    if (fit.converged && fit.rss < best_rss) {
      best_rss = fit.rss;
      out = fit;
    }
  }
  if (out.params.empty())
    out = fit_least_squares(x, y, eval_decaying_cosine,
                            {amp, f0, 0.0, 0.5 * span, mean});
  // Canonical form: positive amplitude and decay time
  if (!out.params.empty()) {
    if (out.params[3] < 0.0) out.params[3] = -out.params[3];
    if (out.params[0] < 0.0) {
      out.params[0] = -out.params[0];
      out.params[2] += M_PI;
    }
    out.params[2] = std::remainder(out.params[2], kTwoPi);
    if (out.params[1] < 0.0) {
      out.params[1] = -out.params[1];
      out.params[2] = -out.params[2];
    }
  }
  return out;
}

double eval_rabi_sin2(double x, const std::vector<double>& p) {
  const double s = std::sin(M_PI * p[1] * x);
  return p[0] * s * s + p[2];
}

FitResult fit_rabi_sin2(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 4)
    throw LengthMismatch("need at least 4 samples to fit");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());

  const std::size_t pad = std::max<std::size_t>(256, x.size() * 8);
  std::vector<std::complex<double>> z(pad, {0.0, 0.0});
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = {y[i] - mean, 0.0};
  const auto spec = dft(z);
  std::size_t best = 1;
  double best_mag = 0.0;
  for (std::size_t k = 1; k < pad / 2; ++k) {
    const double mag = std::abs(spec[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  const double f0 = static_cast<double>(best) / (static_cast<double>(pad) * dx);

  auto out = fit_least_squares(x, y, eval_rabi_sin2, {*mx - *mn, f0, *mn});
  if (!out.params.empty() && out.params[1] < 0.0) out.params[1] = -out.params[1];
  return out;
}

FitResult fit_exponential_decay(const std::vector<double>& x,
                                const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw LengthMismatch("need at least 3 samples to fit");
  std::size_t tail = std::max<std::size_t>(1, y.size() / 5);
  double c0 = 0.0;
  for (std::size_t i = y.size() - tail; i < y.size(); ++i) c0 += y[i];
  c0 /= static_cast<double>(tail);
  const double a0 = y.front() - c0;
  const double t0 = (x.back() - x.front()) / 3.0;
  return fit_least_squares(x, y, eval_exponential_decay, {a0, t0, c0});
}

}  // namespace qcs
