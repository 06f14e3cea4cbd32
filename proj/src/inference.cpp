#include "prmix/inference.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "prmix/error.hpp"

namespace prmix {

Interval clopper_pearson(std::uint64_t k, std::uint64_t trials, double confidence) {
  if (trials == 0 || k > trials) throw Error(ErrorCode::InvalidArgument, "bad binomial counts");
  const double alpha = 1.0 - confidence;
  const double kk = static_cast<double>(k), nn = static_cast<double>(trials);
  Interval out;
  out.lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<double>(kk, nn - kk + 1.0), alpha / 2);
  out.hi = k == trials ? 1.0
                       : boost::math::quantile(boost::math::beta_distribution<double>(kk + 1.0, nn - kk), 1.0 - alpha / 2);
  return out;
}

MeanSE mean_se(std::span<const double> xs) {
  MeanSE out;
  if (xs.empty()) return out;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  out.mean = m;
  if (xs.size() > 1) {
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected) {
  if (observed.size() != probs.size()) throw Error(ErrorCode::LengthMismatch, "observed/probability length mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o_acc += static_cast<double>(observed[k]);
    e_acc += probs[k] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  ChiSquareResult r;
  r.dof = static_cast<int>(exp.size()) - 1;
  for (std::size_t k = 0; k < exp.size(); ++k) {
    if (exp[k] <= 0.0) {
      if (obs[k] > 0.0) {
        r.statistic = INFINITY;
        r.p_value = 0.0;
        return r;
      }
      continue;
    }
    r.statistic += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
  }
  if (r.dof <= 0) {
    r.p_value = 1.0;
    return r;
  }
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(r.dof), r.statistic));
  return r;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double x = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double dkw_margin(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "linear fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      double r = y[k] - f.intercept - f.slope * x[k];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

double normal_upper_tail(double z) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z));
}

}  // namespace prmix
