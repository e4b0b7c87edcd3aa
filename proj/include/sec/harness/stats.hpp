#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace sec::harness {

// Kill/death ratio. A deathless record counts as kills / 1.
inline double kd_ratio(long kills, long deaths) {
  return deaths > 0 ? static_cast<double>(kills) / static_cast<double>(deaths)
                    : static_cast<double>(kills);
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n - 1)
  double std_error = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-tailed
};

// Unpaired two-tailed t-test without the equal-variance assumption, with
// Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs >= 2 samples per group");
  const Summary sa = summarize(a);
  const Summary sb = summarize(b);
  const double va = sa.variance / static_cast<double>(sa.n);
  const double vb = sb.variance / static_cast<double>(sb.n);
  WelchResult r;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.t = sa.mean == sb.mean ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), sa.mean - sb.mean);
    r.df = static_cast<double>(sa.n + sb.n - 2);
    r.p = sa.mean == sb.mean ? 1.0 : 0.0;
    return r;
  }
  r.t = (sa.mean - sb.mean) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace sec::harness
