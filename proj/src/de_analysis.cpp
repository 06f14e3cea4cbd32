#include "prmix/de_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "prmix/error.hpp"
#include "prmix/parallel.hpp"

namespace prmix {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double theta_eval_norm(double norm, double n) {
  const double r = std::sqrt(n);
  // exp(-r|x|)/r - 1/r = expm1(-r|x|)/r avoids cancellation near 0.
  return norm + std::expm1(-r * norm) / r;
}

double theta_eval(std::span<const double> x, double n) { return theta_eval_norm(norm2(x), n); }

std::vector<double> theta_grad(std::span<const double> x, double n) {
  std::vector<double> g(x.size(), 0.0);
  const double nx = norm2(x);
  if (nx == 0.0) return g;
  const double scale = -std::expm1(-std::sqrt(n) * nx) / nx;
  for (std::size_t k = 0; k < x.size(); ++k) g[k] = scale * x[k];
  return g;
}

double theta_second_order_slack(std::span<const double> x, std::span<const double> h, double n) {
  if (x.size() != h.size()) throw Error(ErrorCode::LengthMismatch, "x and h differ in length");
  const auto g = theta_grad(x, n);
  std::vector<double> xh(x.size());
  double inner = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xh[k] = x[k] + h[k];
    inner += h[k] * g[k];
  }
  const double hn = norm2(h);
  return theta_eval(x, n) + inner + 0.5 * std::sqrt(n) * hn * hn - theta_eval(xh, n);
}

NoiseFn zero_noise() {
  return [](double, std::int64_t, double, Rng&) { return 0.0; };
}

NoiseFn symmetric_noise(double D, double eps) {
  return [D, eps](double z, std::int64_t, double eps_phi, Rng& rng) {
    const double a = std::min(D * eps, (1.0 - eps_phi) * z);
    return a * rng.sign();
  };
}

GenDEResult gen_de_harness(const GenDEInstance& inst, std::int64_t t, double lambda, std::size_t replicas,
                           std::uint64_t seed, double alpha, std::size_t checkpoints) {
  if (!(inst.eps > 0.0 && inst.eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0,1)");
  if (!inst.noise) throw Error(ErrorCode::InvalidArgument, "no noise generator");
  if (t < 1 || replicas < 1) throw Error(ErrorCode::InvalidArgument, "need t >= 1 and replicas >= 1");
  const double eps = inst.eps;
  std::vector<double> phi(static_cast<std::size_t>(t) + 1), log_factor(phi.size(), 0.0);
  for (std::int64_t k = 0; k <= t; ++k) {
    phi[k] = inst.phi(static_cast<double>(k));
    if (!(phi[k] > 0.0 && phi[k] <= 1.0)) throw Error(ErrorCode::InvalidArgument, "phi must take values in (0,1]");
    if (k > 0 && phi[k] < phi[k - 1]) throw Error(ErrorCode::InvalidArgument, "phi must be non-decreasing");
  }
  // Phi(k) = eps^-1 sum_{j<=k} -log1p(-eps phi(j))
  std::vector<double> Phi(phi.size(), 0.0);
  for (std::int64_t k = 1; k <= t; ++k) Phi[k] = Phi[k - 1] - std::log1p(-eps * phi[k]) / eps;

  GenDEResult res;
  res.t = t;
  res.lambda = lambda;
  res.replicas = replicas;
  res.Phi_t = Phi[t];
  for (std::int64_t k = 1; k <= t; ++k) res.sum_phi += phi[k];
  {
    // Composite Simpson, 32 panels per unit.
    const int per_unit = 32;
    const std::int64_t m = t * per_unit;
    const double hstep = 1.0 / per_unit;
    double acc = inst.phi(0.0) + inst.phi(static_cast<double>(t));
    for (std::int64_t k = 1; k < m; ++k) acc += (k % 2 ? 4.0 : 2.0) * inst.phi(k * hstep);
    res.integral_phi = acc * hstep / 3.0;
  }
  res.phi_chain_ok = res.Phi_t >= res.sum_phi - 1e-12 && res.sum_phi >= res.integral_phi - 1e-9;
  res.threshold = lambda * std::sqrt(eps) + std::exp(-eps * res.integral_phi) * inst.z0;

  std::vector<std::int64_t> marks;
  const std::size_t nmarks = std::min<std::size_t>(checkpoints, static_cast<std::size_t>(t));
  for (std::size_t c = 0; c < nmarks; ++c)
    marks.push_back(static_cast<std::int64_t>(c * static_cast<std::size_t>(t) / std::max<std::size_t>(nmarks, 1)));
  const double shift = inst.D * std::sqrt(eps) / phi[0];
  auto Z = [&](std::int64_t k, double z) { return std::exp(eps * Phi[k]) * (z - shift); };

  struct Path {
    double z = 0.0;
    std::vector<double> inc;
    std::uint64_t clamps = 0;
  };
  auto paths = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    Path p;
    p.inc.assign(marks.size(), 0.0);
    double z = inst.z0;
    std::size_t next = 0;
    for (std::int64_t k = 0; k < t; ++k) {
      const double ep = eps * phi[k + 1];
      const double m = inst.noise(z, k, ep, rng);
      if (std::abs(m) > inst.D * eps * (1.0 + 1e-12))
        throw Error(ErrorCode::NoiseBoundViolated, "|M| = " + std::to_string(std::abs(m)) + " exceeds D eps");
      double zn = std::min(1.0, z - ep * z + m);
      if (zn < 0.0) {
        zn = 0.0;
        ++p.clamps;
      }
      if (next < marks.size() && marks[next] == k) p.inc[next++] = Z(k + 1, zn) - Z(k, z);
      z = zn;
    }
    p.z = z;
    return p;
  });
  for (const auto& p : paths) {
    res.final_z.push_back(p.z);
    res.lower_clamps += p.clamps;
    if (p.z >= res.threshold) ++res.exceed;
  }
  res.tail = static_cast<double>(res.exceed) / static_cast<double>(replicas);
  res.ci = clopper_pearson(res.exceed, replicas, 0.99);
  res.checkpoints = marks.size();
  for (std::size_t c = 0; c < marks.size(); ++c) {
    std::vector<double> xs;
    xs.reserve(replicas);
    for (const auto& p : paths) xs.push_back(p.inc[c]);
    const MeanSE ms = mean_se(xs);
    if (ms.se <= 0.0) {
      if (ms.mean > 1e-15) ++res.supermartingale_rejections;
      continue;
    }
    const double zstat = ms.mean / ms.se;
    res.max_increment_z = std::max(res.max_increment_z, zstat);
    if (normal_upper_tail(zstat) < alpha) ++res.supermartingale_rejections;
  }
  return res;
}

std::vector<std::vector<int>> record_counts(Configuration sigma, std::int64_t steps, Rng& rng) {
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  CountTracker tracker(sigma);
  out.push_back(tracker.counts());
  for (std::int64_t t = 0; t < steps; ++t) {
    StepSample mv = sample_move(sigma.n(), rng);
    const Element before = apply_move(sigma, mv);
    tracker.update(before, sigma[mv.i]);
    out.push_back(tracker.counts());
  }
  return out;
}

std::vector<ProportionMatrix> record_matrices(const Configuration& sigma_star, Configuration sigma, std::int64_t steps,
                                              Rng& rng) {
  std::vector<ProportionMatrix> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  ProportionMatrix m = proportion_matrix(sigma_star, sigma);
  out.push_back(m);
  for (std::int64_t t = 0; t < steps; ++t) {
    StepSample mv = sample_move(sigma.n(), rng);
    const Element before = apply_move(sigma, mv);
    m.move(sigma_star[mv.i], before, sigma[mv.i]);
    out.push_back(m);
  }
  return out;
}

namespace {

CMatrix x_of_counts(std::span<const int> counts, const Irrep& rho) {
  double n = 0.0;
  for (int c : counts) n += c;
  std::vector<double> v(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) v[a] = counts[a] / n;
  return fourier_coeff(v, rho);
}

// sum_b w_b (rho(b^2) + I)
CMatrix square_term(std::span<const double> w, const Irrep& rho) {
  const int d = rho.dim;
  CMatrix acc = CMatrix::Zero(d, d);
  for (std::size_t b = 0; b < w.size(); ++b) {
    if (w[b] == 0.0) continue;
    const CMatrix& r = rho.matrices[b];
    acc += w[b] * (r * r + CMatrix::Identity(d, d));
  }
  return acc;
}

std::vector<double> row_weights_star(const ProportionMatrix& m, int a) {
  const int q = m.q();
  int r = 0;
  for (int b = 0; b < q; ++b) r += m(a, b);
  if (r == 0) throw Error(ErrorCode::EmptyRow, "row " + std::to_string(a) + " of the reference is empty");
  std::vector<double> w(q);
  for (int b = 0; b < q; ++b) w[b] = static_cast<double>(m(a, b)) / r;
  return w;
}

struct ResidualBuilder {
  ResidualSeries out;
  void add(const CMatrix& now, const CMatrix& next, const CMatrix& X, const CMatrix& exact_drift) {
    const CMatrix raw = next - now - now * X;
    const CMatrix rearranged = next - now * (CMatrix::Identity(X.rows(), X.cols()) + X);
    out.two_way_diff = std::max(out.two_way_diff, (raw - rearranged).cwiseAbs().maxCoeff());
    const double h = hs_norm(raw);
    if (h > out.bound * (1.0 + 1e-12)) ++out.bound_violations;
    out.hs_raw.push_back(h);
    out.raw.push_back(raw);
    out.exact.push_back(next - now - exact_drift);
  }
};

}  // namespace

CMatrix exact_fourier_drift(std::span<const int> counts, const Irrep& rho) {
  double n = 0.0;
  for (int c : counts) n += c;
  std::vector<double> w(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) w[a] = counts[a] / n;
  const CMatrix x = fourier_coeff(w, rho);
  const int ni = static_cast<int>(n);
  return x * drift_matrix(x, ni) - square_term(w, rho) / (2.0 * n * (n - 1.0));
}

CMatrix exact_row_drift(const ProportionMatrix& m, int a, const Irrep& rho) {
  const std::vector<double> w = row_weights_star(m, a);
  const CMatrix y = fourier_row(w, rho);
  const CMatrix x = x_of_counts(m.col_sums(), rho);
  const double n = m.n();
  return y * drift_matrix(x, m.n()) - square_term(w, rho) / (2.0 * n * (n - 1.0));
}

ResidualSeries fourier_drift_residual(const std::vector<std::vector<int>>& counts, const Irrep& rho) {
  ResidualBuilder b;
  if (counts.empty()) return b.out;
  int n = 0;
  for (int c : counts.front()) n += c;
  const int q = static_cast<int>(rho.matrices.size());
  b.out.bound = 2.0 * q * std::sqrt(static_cast<double>(rho.dim)) / n;
  CMatrix now = x_of_counts(counts.front(), rho);
  for (std::size_t t = 0; t + 1 < counts.size(); ++t) {
    const CMatrix next = x_of_counts(counts[t + 1], rho);
    b.add(now, next, drift_matrix(now, n), exact_fourier_drift(counts[t], rho));
    now = next;
  }
  return std::move(b.out);
}

ResidualSeries row_drift_residual(const std::vector<ProportionMatrix>& traj, int a, const Irrep& rho) {
  ResidualBuilder b;
  if (traj.empty()) return b.out;
  const int n = traj.front().n(), q = traj.front().q();
  b.out.bound = 4.0 * q * q * std::sqrt(static_cast<double>(rho.dim)) / n;
  CMatrix now = fourier_row(row_weights_star(traj.front(), a), rho);
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    const CMatrix next = fourier_row(row_weights_star(traj[t + 1], a), rho);
    const CMatrix x = x_of_counts(traj[t].col_sums(), rho);
    b.add(now, next, drift_matrix(x, n), exact_row_drift(traj[t], a, rho));
    now = next;
  }
  return std::move(b.out);
}

double residual_mean_z(const std::vector<CMatrix>& residuals) {
  if (residuals.size() < 2) return 0.0;
  const auto rows = residuals.front().rows(), cols = residuals.front().cols();
  double worst = 0.0;
  std::vector<double> re(residuals.size()), im(residuals.size());
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (std::size_t k = 0; k < residuals.size(); ++k) {
        re[k] = residuals[k](r, c).real();
        im[k] = residuals[k](r, c).imag();
      }
      for (const auto* xs : {&re, &im}) {
        const MeanSE ms = mean_se(*xs);
        if (ms.se > 0.0) worst = std::max(worst, std::abs(ms.mean) / ms.se);
      }
    }
  return worst;
}

WSeries lower_comparison_w(const std::vector<std::vector<int>>& counts, const Irrep& rho) {
  WSeries s;
  if (counts.empty()) return s;
  int n = 0;
  for (int c : counts.front()) n += c;
  if (3 * (n - counts.front()[0]) > n)
    throw Error(ErrorCode::PreconditionViolated, "start has more than n/3 non-identity sites");
  const double d = rho.dim, nd = n;
  auto z_of = [&](const CMatrix& x) { return x.trace().real() / d; };
  CMatrix x = x_of_counts(counts.front(), rho);
  double w = 1.0 / 3.0, we = w;
  s.z.push_back(z_of(x));
  s.w.push_back(w);
  s.w_exact.push_back(we);
  if (s.z.back() < w - 1e-12) ++s.violations;
  for (std::size_t t = 0; t + 1 < counts.size(); ++t) {
    const CMatrix next = x_of_counts(counts[t + 1], rho);
    const CMatrix h = (x + x.adjoint()) / 2.0;
    const double z = z_of(x), zn = z_of(next);
    const double raw_drift = (h * h).trace().real() / d / (nd - 1.0) - z / nd;
    const double exact_drift = exact_fourier_drift(counts[t], rho).trace().real() / d;
    w = (1.0 - 1.0 / nd) * w + (zn - z - raw_drift);
    we = (1.0 - 1.0 / nd) * we + (zn - z - exact_drift);
    s.z.push_back(zn);
    s.w.push_back(w);
    s.w_exact.push_back(we);
    if (zn < w - 1e-12) ++s.violations;
    x = next;
  }
  return s;
}

WExperiment lower_w_experiment(const Configuration& sigma0, const Irrep& rho, std::int64_t steps, std::size_t replicas,
                               std::uint64_t seed) {
  struct Path {
    std::uint64_t violations = 0;
    double w = 0.0, we = 0.0;
  };
  auto paths = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    const WSeries s = lower_comparison_w(record_counts(sigma0, steps, rng), rho);
    return Path{s.violations, s.w.back(), s.w_exact.back()};
  });
  WExperiment ex;
  std::vector<double> w, we;
  for (const auto& p : paths) {
    ex.violations += p.violations;
    w.push_back(p.w);
    we.push_back(p.we);
  }
  ex.w_T = mean_se(w);
  ex.w_exact_T = mean_se(we);
  ex.expected = std::pow(1.0 - 1.0 / sigma0.n(), static_cast<double>(steps)) / 3.0;
  return ex;
}

}  // namespace prmix
