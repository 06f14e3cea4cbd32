#include "prmix/lumped.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>

#include "prmix/error.hpp"

namespace prmix {

namespace mp = boost::multiprecision;

std::vector<std::pair<ProportionMatrix, std::int64_t>> matrix_step_counts(const FiniteGroup& g,
                                                                          const ProportionMatrix& m) {
  const int q = g.order();
  std::vector<int> col = m.col_sums();
  std::map<std::vector<int>, std::int64_t> acc;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      const int nab = m(a, b);
      if (nab == 0) continue;
      for (int d = 0; d < q; ++d) {
        const int partners = col[d] - (d == b ? 1 : 0);
        if (partners <= 0) continue;
        for (int s : {1, -1}) {
          const int c = g.mul(b, g.signed_power(d, s));
          std::vector<int> e = m.entries();
          --e[static_cast<std::size_t>(a) * q + b];
          ++e[static_cast<std::size_t>(a) * q + c];
          acc[std::move(e)] += static_cast<std::int64_t>(nab) * partners;
        }
      }
    }
  std::vector<std::pair<ProportionMatrix, std::int64_t>> out;
  out.reserve(acc.size());
  for (auto& [e, w] : acc) out.emplace_back(ProportionMatrix(q, e), w);
  return out;
}

std::int64_t LumpedChain::index_of(const ProportionMatrix& m) const {
  auto it = index.find(m);
  return it == index.end() ? -1 : it->second;
}

double lumped_state_bound(const std::vector<int>& row_sums, int q) {
  double total = 1.0;
  for (int r : row_sums) {
    // C(r + q - 1, q - 1)
    double c = 1.0;
    for (int k = 1; k < q; ++k) c = c * (r + k) / k;
    total *= c;
  }
  return total;
}

namespace {

void compositions(int remaining, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur.push_back(v);
    compositions(remaining - v, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

LumpedChain build_lumped_rows(const GroupPtr& g, const std::vector<int>& row_sums, const LumpedOptions& opt) {
  const int q = g->order();
  if (static_cast<int>(row_sums.size()) != q) throw Error(ErrorCode::LengthMismatch, "need one row sum per element");
  const double bound = lumped_state_bound(row_sums, q);
  if (bound > static_cast<double>(opt.state_budget))
    throw Error(ErrorCode::StateBudgetExceeded, "up to " + std::to_string(static_cast<long long>(bound)) +
                                                    " states exceeds budget " + std::to_string(opt.state_budget));
  LumpedChain chain;
  chain.group = g;
  chain.row_sums = row_sums;
  for (int r : row_sums) chain.n += r;
  if (chain.n < 2) throw Error(ErrorCode::NTooSmall, "lumped chain needs n >= 2");

  std::vector<std::vector<std::vector<int>>> rows(static_cast<std::size_t>(q));
  for (int a = 0; a < q; ++a) {
    std::vector<int> cur;
    compositions(row_sums[a], q, cur, rows[a]);
  }
  std::vector<std::size_t> pick(static_cast<std::size_t>(q), 0);
  while (true) {
    std::vector<int> e;
    e.reserve(static_cast<std::size_t>(q) * q);
    for (int a = 0; a < q; ++a) e.insert(e.end(), rows[a][pick[a]].begin(), rows[a][pick[a]].end());
    ProportionMatrix m(q, std::move(e));
    if (g->generates(m.column_support())) {
      chain.index.emplace(m, static_cast<std::int32_t>(chain.states.size()));
      chain.states.push_back(std::move(m));
    }
    int pos = q - 1;
    while (pos >= 0 && ++pick[pos] == rows[pos].size()) {
      pick[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }

  const double moves = 2.0 * chain.n * (chain.n - 1.0);
  CsrMatrix& k = chain.kernel;
  k.rows = k.cols = static_cast<std::int64_t>(chain.states.size());
  for (const auto& m : chain.states) {
    std::vector<std::pair<std::int32_t, std::int64_t>> row;
    for (auto& [target, w] : matrix_step_counts(*g, m)) {
      std::int64_t idx = chain.index_of(target);
      if (idx < 0) throw Error(ErrorCode::ValidationFailed, "transition leaves the generating state space");
      row.emplace_back(static_cast<std::int32_t>(idx), w);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t p = 0; p < row.size(); ++p) {
      if (p > 0 && row[p].first == row[p - 1].first) {
        k.val.back() += static_cast<double>(row[p].second) / moves;
        continue;
      }
      k.col.push_back(row[p].first);
      k.val.push_back(static_cast<double>(row[p].second) / moves);
    }
    k.row_ptr.push_back(static_cast<std::int64_t>(k.col.size()));
  }
  chain.kernel_t = chain.kernel.transpose();
  chain.stationary = stationary_lumped(chain);
  return chain;
}

LumpedChain build_lumped(const GroupPtr& g, int n, const Configuration& sigma0, const LumpedOptions& opt) {
  if (sigma0.n() != n) throw Error(ErrorCode::LengthMismatch, "reference configuration has the wrong length");
  return build_lumped_rows(g, counts(sigma0), opt);
}

namespace {

std::vector<mp::cpp_int> stationary_weights(const LumpedChain& chain) {
  const int q = chain.group->order();
  std::vector<mp::cpp_int> fact(static_cast<std::size_t>(chain.n) + 1);
  fact[0] = 1;
  for (int k = 1; k <= chain.n; ++k) fact[k] = fact[k - 1] * k;
  mp::cpp_int top = 1;
  for (int r : chain.row_sums) top *= fact[r];
  std::vector<mp::cpp_int> w;
  w.reserve(chain.states.size());
  for (const auto& m : chain.states) {
    mp::cpp_int bottom = 1;
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) bottom *= fact[m(a, b)];
    w.push_back(top / bottom);
  }
  return w;
}

}  // namespace

std::vector<double> stationary_lumped(const LumpedChain& chain) {
  using Float = mp::cpp_bin_float_100;
  std::vector<mp::cpp_int> w = stationary_weights(chain);
  mp::cpp_int z = 0;
  for (const auto& x : w) z += x;
  const Float zf(z);
  std::vector<double> pi(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) pi[i] = static_cast<double>(Float(w[i]) / zf);
  return pi;
}

std::pair<std::vector<std::string>, std::string> stationary_weights_exact(const LumpedChain& chain) {
  std::vector<mp::cpp_int> w = stationary_weights(chain);
  mp::cpp_int z = 0;
  std::vector<std::string> out;
  for (const auto& x : w) {
    z += x;
    out.push_back(x.str());
  }
  return {out, z.str()};
}

namespace {

template <class Step>
std::vector<double> curve_impl(const LumpedChain& chain, const ProportionMatrix& start, std::int64_t t_max, Step step,
                               bool parallel_tv) {
  std::int64_t s = chain.index_of(start);
  if (s < 0) throw Error(ErrorCode::StartNotInChain, "start matrix is not a state of the chain");
  std::vector<double> mu(chain.size(), 0.0), next(chain.size(), 0.0);
  mu[static_cast<std::size_t>(s)] = 1.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(t_max) + 1);
  auto tv = [&](const std::vector<double>& p) {
    return parallel_tv ? tv_distance(p, chain.stationary) : tv_distance_serial(p, chain.stationary);
  };
  out.push_back(tv(mu));
  for (std::int64_t t = 1; t <= t_max; ++t) {
    step(mu, next);
    mu.swap(next);
    out.push_back(tv(mu));
  }
  return out;
}

}  // namespace

std::vector<double> tv_curve(const LumpedChain& chain, const ProportionMatrix& start, std::int64_t t_max) {
  return curve_impl(
      chain, start, t_max,
      [&](const std::vector<double>& mu, std::vector<double>& next) { step_distribution(chain.kernel_t, mu, next); },
      true);
}

std::vector<double> tv_curve_serial(const LumpedChain& chain, const ProportionMatrix& start, std::int64_t t_max) {
  return curve_impl(
      chain, start, t_max,
      [&](const std::vector<double>& mu, std::vector<double>& next) {
        step_distribution_serial(chain.kernel, mu, next);
      },
      false);
}

std::vector<std::int64_t> mixing_times(const LumpedChain& chain, const ProportionMatrix& start,
                                       const std::vector<double>& eps, std::int64_t t_cap) {
  std::int64_t s = chain.index_of(start);
  if (s < 0) throw Error(ErrorCode::StartNotInChain, "start matrix is not a state of the chain");
  std::vector<std::int64_t> out(eps.size(), -1);
  std::vector<double> mu(chain.size(), 0.0), next(chain.size(), 0.0);
  mu[static_cast<std::size_t>(s)] = 1.0;
  std::size_t remaining = eps.size();
  for (std::int64_t t = 0;; ++t) {
    double d = tv_distance(mu, chain.stationary);
    for (std::size_t k = 0; k < eps.size(); ++k)
      if (out[k] < 0 && d <= eps[k]) {
        out[k] = t;
        --remaining;
      }
    if (remaining == 0) return out;
    if (t >= t_cap) throw Error(ErrorCode::NotConverged, "mixing time exceeds cap " + std::to_string(t_cap));
    step_distribution(chain.kernel_t, mu, next);
    mu.swap(next);
  }
}

std::int64_t mixing_time(const LumpedChain& chain, const ProportionMatrix& start, double eps, std::int64_t t_cap) {
  return mixing_times(chain, start, {eps}, t_cap).front();
}

std::vector<double> brute_force_tv(const GroupPtr& g, int n, const Configuration& sigma0, std::int64_t t_max) {
  const int q = g->order();
  double space = std::pow(static_cast<double>(q), n);
  if (space > 2e6) throw Error(ErrorCode::SpaceTooLarge, "|G|^n = " + std::to_string(space) + " exceeds 2e6");
  if (sigma0.n() != n) throw Error(ErrorCode::LengthMismatch, "reference configuration has the wrong length");
  const std::int64_t total = static_cast<std::int64_t>(std::llround(space));
  std::vector<std::int64_t> pw(static_cast<std::size_t>(n) + 1, 1);
  for (int i = 1; i <= n; ++i) pw[i] = pw[i - 1] * q;
  auto digit = [&](std::int64_t code, int i) { return static_cast<int>((code / pw[i]) % q); };

  std::vector<std::int32_t> idx(static_cast<std::size_t>(total), -1);
  std::vector<std::int64_t> codes;
  for (std::int64_t code = 0; code < total; ++code) {
    std::uint64_t mask = 0;
    for (int i = 0; i < n; ++i) mask |= std::uint64_t{1} << digit(code, i);
    if (g->generates(mask)) {
      idx[static_cast<std::size_t>(code)] = static_cast<std::int32_t>(codes.size());
      codes.push_back(code);
    }
  }
  std::int64_t start = 0;
  for (int i = 0; i < n; ++i) start += pw[i] * sigma0[i];
  if (idx[static_cast<std::size_t>(start)] < 0) throw Error(ErrorCode::StartNotInChain, "start does not generate");

  const double uniform = 1.0 / static_cast<double>(codes.size());
  const double w = 1.0 / (2.0 * n * (n - 1.0));
  std::vector<double> mu(codes.size(), 0.0), next(codes.size(), 0.0);
  mu[static_cast<std::size_t>(idx[static_cast<std::size_t>(start)])] = 1.0;
  auto dist = [&] {
    double s = 0.0;
    for (double p : mu) s += std::abs(p - uniform);
    return 0.5 * s;
  };
  std::vector<double> out{dist()};
  for (std::int64_t t = 1; t <= t_max; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      if (mu[k] == 0.0) continue;
      const std::int64_t code = codes[k];
      const double mass = mu[k] * w;
      for (int i = 0; i < n; ++i) {
        const int vi = digit(code, i);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const int vj = digit(code, j);
          for (int s : {1, -1}) {
            const int nv = g->mul(static_cast<Element>(vi), g->signed_power(static_cast<Element>(vj), s));
            const std::int64_t target = code + (nv - vi) * pw[i];
            next[static_cast<std::size_t>(idx[static_cast<std::size_t>(target)])] += mass;
          }
        }
      }
    }
    mu.swap(next);
    out.push_back(dist());
  }
  return out;
}

ConnectivityReport connectivity_report(const LumpedChain& chain, const ProportionMatrix& start) {
  std::int64_t s = chain.index_of(start);
  if (s < 0) throw Error(ErrorCode::StartNotInChain, "start matrix is not a state of the chain");
  auto bfs = [&](const CsrMatrix& k) {
    std::vector<char> seen(chain.size(), 0);
    std::deque<std::int64_t> work{s};
    seen[static_cast<std::size_t>(s)] = 1;
    std::size_t count = 1;
    while (!work.empty()) {
      std::int64_t r = work.front();
      work.pop_front();
      for (std::int64_t e = k.row_ptr[r]; e < k.row_ptr[r + 1]; ++e) {
        auto c = k.col[e];
        if (k.val[e] > 0.0 && !seen[c]) {
          seen[c] = 1;
          ++count;
          work.push_back(c);
        }
      }
    }
    return count;
  };
  ConnectivityReport rep;
  rep.states = chain.size();
  rep.reachable_from_start = bfs(chain.kernel);
  rep.reaching_start = bfs(chain.kernel_t);
  rep.irreducible = rep.reachable_from_start == rep.states && rep.reaching_start == rep.states;
  return rep;
}

EigenCheck eigen_cross_check(const LumpedChain& chain) {
  const auto m = static_cast<Eigen::Index>(chain.size());
  if (m > 3000) throw Error(ErrorCode::StateBudgetExceeded, "dense eigen cross-check limited to 3000 states");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (std::int64_t e = chain.kernel.row_ptr[r]; e < chain.kernel.row_ptr[r + 1]; ++e) k(r, chain.kernel.col[e]) = chain.kernel.val[e];
  Eigen::EigenSolver<Eigen::MatrixXd> es(k.transpose());
  const auto& ev = es.eigenvalues();
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < m; ++i)
    if (std::abs(ev(i) - 1.0) < std::abs(ev(top) - 1.0)) top = i;
  Eigen::VectorXd v = es.eigenvectors().col(top).real();
  v /= v.sum();
  EigenCheck out;
  for (Eigen::Index i = 0; i < m; ++i) out.eigen_vs_formula = std::max(out.eigen_vs_formula, std::abs(v(i) - chain.stationary[i]));
  for (Eigen::Index i = 0; i < m; ++i)
    if (i != top) out.second_modulus = std::max(out.second_modulus, std::abs(ev(i)));
  out.stationary_residual = stationary_residual(chain);
  return out;
}

double kernel_row_sum_error(const LumpedChain& chain) {
  double worst = 0.0;
  for (std::int64_t r = 0; r < chain.kernel.rows; ++r) {
    double s = 0.0;
    for (std::int64_t e = chain.kernel.row_ptr[r]; e < chain.kernel.row_ptr[r + 1]; ++e) s += chain.kernel.val[e];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double stationary_residual(const LumpedChain& chain) {
  std::vector<double> next(chain.size());
  step_distribution_serial(chain.kernel, chain.stationary, next);
  double worst = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) worst = std::max(worst, std::abs(next[i] - chain.stationary[i]));
  return worst;
}

void write_curve_csv(std::ostream& out, const LumpedChain& chain, const std::vector<double>& curve, std::int64_t t_offset) {
  out << "# group=" << chain.group->name() << "\n# n=" << chain.n << "\n# row_sums=";
  for (std::size_t a = 0; a < chain.row_sums.size(); ++a) out << (a ? " " : "") << chain.row_sums[a];
  out << "\n# states=" << chain.size() << "\n# seed=irrelevant (exact)\n# error_bound=t*1e-14\n";
  out << "t,d_t\n";
  out.precision(17);
  for (std::size_t t = 0; t < curve.size(); ++t) out << (static_cast<std::int64_t>(t) + t_offset) << "," << curve[t] << "\n";
}

}  // namespace prmix
