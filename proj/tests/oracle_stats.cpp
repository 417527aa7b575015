#include "oracle_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

// Series expansion of P(a,x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x), good for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double inverse_gamma_cdf(double x, double shape, double scale) {
  if (x <= 0.0) return 0.0;
  return gamma_q(shape, scale / x);
}

double inverse_gamma_median(double shape, double scale) {
  // bisection on the gamma tail: find g with Q(shape, g) = 1/2
  double lo = 0.0, hi = shape * 10.0 + 100.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (gamma_q(shape, mid) > 0.5) lo = mid;
    else hi = mid;
  }
  return scale / (0.5 * (lo + hi));
}

double truncnorm_cdf(double x, double mu, double sigma, double a, double b) {
  double za = (a - mu) / sigma;
  double zb = (b - mu) / sigma;
  double zx = (x - mu) / sigma;
  if (zx <= za) return 0.0;
  if (zx >= zb) return 1.0;
  if (za > 0.0) {
    // complementary form for right-tail regions
    double sa = 0.5 * std::erfc(za * 0.7071067811865475244);
    double sb = zb == std::numeric_limits<double>::infinity()
                    ? 0.0
                    : 0.5 * std::erfc(zb * 0.7071067811865475244);
    double sx = 0.5 * std::erfc(zx * 0.7071067811865475244);
    return (sa - sx) / (sa - sb);
  }
  double fa = normal_cdf(za);
  double fb = normal_cdf(zb);
  return (normal_cdf(zx) - fa) / (fb - fa);
}

double draw_truncnorm_ref(double mu, double sigma, double a, double b,
                          qpcrfbi::Rng& rng) {
  double za = (a - mu) / sigma;
  double zb = (b - mu) / sigma;
  double u = rng.u01();
  double z;
  if (za >= 0.0) {
    // interpolate in tail probabilities, then invert the complement
    double sa = 0.5 * std::erfc(za * 0.7071067811865475244);
    double sb = zb == std::numeric_limits<double>::infinity()
                    ? 0.0
                    : 0.5 * std::erfc(zb * 0.7071067811865475244);
    double s = sa + u * (sb - sa);
    z = -normal_quantile(s);
  } else if (zb <= 0.0) {
    double fa = normal_cdf(za);
    double fb = normal_cdf(zb);
    z = normal_quantile(fa + u * (fb - fa));
  } else {
    double fa = normal_cdf(za);
    double fb = normal_cdf(zb);
    z = normal_quantile(fa + u * (fb - fa));
  }
  return mu + sigma * z;
}

double draw_chisq_int_ref(int df, qpcrfbi::Rng& rng) {
  double s = 0.0;
  for (int i = 0; i < df; ++i) {
    double n = rng.normal();
    s += n * n;
  }
  return s;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    double lo = static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(f - lo), std::fabs(f - hi)));
  }
  return d;
}

double ks_statistic2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] <= b[ib]) ++ia;
    else ++ib;
    double fa = static_cast<double>(ia) / na;
    double fb = static_cast<double>(ib) / nb;
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GridPosterior grid_posterior(const std::function<double(double)>& logpdf, double lo,
                             double hi, std::size_t n) {
  std::vector<double> lp(n), xs(n);
  double step = (hi - lo) / static_cast<double>(n - 1);
  double lmax = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = lo + step * static_cast<double>(i);
    lp[i] = logpdf(xs[i]);
    if (lp[i] > lmax) {
      lmax = lp[i];
      argmax = i;
    }
  }
  std::vector<double> w(n);
  double z = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(lp[i] - lmax);
    z += w[i];
    m1 += w[i] * xs[i];
  }
  GridPosterior g;
  g.mean = m1 / z;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = xs[i] - g.mean;
    m2 += w[i] * d * d;
  }
  g.variance = m2 / z;
  double cum = 0.0;
  g.median = xs.back();
  for (std::size_t i = 0; i < n; ++i) {
    cum += w[i];
    if (cum >= 0.5 * z) {
      g.median = xs[i];
      break;
    }
  }
  g.mode = xs[argmax];
  return g;
}

}  // namespace oracle
