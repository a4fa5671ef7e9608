#pragma once

#include <cstddef>
#include <span>

namespace bufferattack::stats {

/// Count, mean and unbiased (n-1) variance of a sample.
///
/// `of()` sums in sorted order, so a summary (and every decision derived from
/// it) is bit-identical for any permutation of the raw values. `var` is 0 when
/// n < 2; such summaries cannot enter welch_t.
struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;

  static SampleSummary of(std::span<const double> values);
};

struct WelchStatistic {
  double t_stat;
  double dof;  // Welch-Satterthwaite
};

// Throws std::invalid_argument when either side has fewer than two samples or
// both variances are zero.
WelchStatistic welch_t(const SampleSummary& a, const SampleSummary& b);

struct TestDecision {
  double t_stat = 0.0;
  double dof = 0.0;
  double threshold = 0.0;  // (1 - alpha) quantile
  bool rejected = false;
};

/// One-tailed Welch test of H0: mean(candidate) <= mean(pivot).
///
/// `rejected` means the candidate's mean is significantly larger. When both
/// variances are zero the decision degenerates to candidate.mean > pivot.mean
/// (t is reported as +/-inf, or 0 for equal means).
TestDecision one_sided_test(const SampleSummary& candidate, const SampleSummary& pivot,
                            double alpha);

/// Regularized incomplete beta I_x(a, b). `complement` must equal 1 - x; it
/// is passed separately so callers can supply it without cancellation.
double incomplete_beta(double a, double b, double x, double complement);

double t_pdf(double x, double dof);
double t_cdf(double x, double dof);

/// x with t_cdf(x, dof) = p. Newton steps on the tail probability, falling
/// back to bisection inside a bracket that starts at [-64, 64] and widens for
/// extreme tails. Throws std::invalid_argument for p outside (0,1) or dof <= 0.
double t_quantile(double p, double dof);

}  // namespace bufferattack::stats
