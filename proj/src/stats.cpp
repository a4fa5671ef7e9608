#include "bufferattack/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace bufferattack::stats {

SampleSummary SampleSummary::of(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.var = ss / static_cast<double>(s.n - 1);
  }
  return s;
}

WelchStatistic welch_t(const SampleSummary& a, const SampleSummary& b) {
  if (a.n < 2 || b.n < 2) throw std::invalid_argument("welch_t: insufficient samples");
  if (a.var + b.var <= 0.0) throw std::invalid_argument("welch_t: zero pooled variance");
  const double va = a.var / static_cast<double>(a.n);
  const double vb = b.var / static_cast<double>(b.n);
  const double se2 = va + vb;
  const double t = (a.mean - b.mean) / std::sqrt(se2);
  const double dof = se2 * se2 / (va * va / static_cast<double>(a.n - 1) +
                                  vb * vb / static_cast<double>(b.n - 1));
  return {t, dof};
}

TestDecision one_sided_test(const SampleSummary& candidate, const SampleSummary& pivot,
                            double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha out of (0,1)");
  TestDecision d;
  if (candidate.n >= 2 && pivot.n >= 2 && candidate.var == 0.0 && pivot.var == 0.0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    d.dof = static_cast<double>(candidate.n + pivot.n - 2);
    d.threshold = t_quantile(1.0 - alpha, d.dof);
    d.t_stat = candidate.mean > pivot.mean ? inf : candidate.mean < pivot.mean ? -inf : 0.0;
    d.rejected = candidate.mean > pivot.mean;
    return d;
  }
  const auto w = welch_t(candidate, pivot);
  d.t_stat = w.t_stat;
  d.dof = w.dof;
  d.threshold = t_quantile(1.0 - alpha, w.dof);
  d.rejected = d.t_stat >= d.threshold;
  return d;
}

namespace {

// Continued fraction for I_x(a,b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Upper tail P(T > x) for x >= 0.
double t_upper_tail(double x, double dof) {
  const double x2 = x * x;
  // I_{dof/(dof+x^2)}(dof/2, 1/2) with the complement computed directly.
  const double z = dof / (dof + x2);
  const double zc = x2 / (dof + x2);
  return 0.5 * incomplete_beta(0.5 * dof, 0.5, z, zc);
}

}  // namespace

double incomplete_beta(double a, double b, double x, double complement) {
  if (x <= 0.0) return 0.0;
  if (complement <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log(complement);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, complement) / b;
}

double t_pdf(double x, double dof) {
  const double log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

double t_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("t_cdf: dof must be positive");
  if (std::isnan(x)) return x;
  if (x == 0.0) return 0.5;
  const double tail = t_upper_tail(std::abs(x), dof);
  return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t_quantile: p outside (0,1)");
  if (!(dof > 0.0)) throw std::invalid_argument("t_quantile: dof must be positive");
  if (p == 0.5) return 0.0;
  // Solve on the positive half-line for the smaller tail mass, then reflect.
  const double q = p > 0.5 ? 1.0 - p : p;
  double lo = 0.0, hi = 64.0;
  while (t_upper_tail(hi, dof) > q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::invalid_argument("t_quantile: tail too extreme");
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = t_upper_tail(x, dof) - q;  // decreasing in x
    if (f == 0.0) break;
    if (f > 0.0) lo = x; else hi = x;
    const double slope = -t_pdf(x, dof);
    double next = slope != 0.0 ? x - f / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return p > 0.5 ? x : -x;
}

}  // namespace bufferattack::stats
