#include "prmix/birth_death.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <ostream>

#include "prmix/error.hpp"
#include "prmix/parallel.hpp"
#include "prmix/rng.hpp"

namespace prmix {

namespace mp = boost::multiprecision;

int BDChain::step(int k, double u) const {
  const double up = p_up(k);
  if (u < up) return k + 1;
  if (u < up + p_down(k)) return k - 1;
  return k;
}

namespace {

template <class T>
void moments_impl(int n, MomentReport& rep) {
  const int k_max = n / 3;
  const T nn = n;
  auto up = [&](int k) { return T(k) * T(n - k) / (nn * T(n - 1)); };
  auto down = [&](int k) { return T(k) * T(k - 1) / (nn * T(n - 1)); };
  auto hold = [&](int k) { return T(n - k) / nn; };
  std::vector<T> e(static_cast<std::size_t>(k_max) + 2, T(0)), s(e.size(), T(0)), v(e.size(), T(0));
  // From i = j - 1: either up (done), hold (restart), or down (climb back to i first).
  for (int j = 2; j <= k_max + 1 && j <= n; ++j) {
    const int i = j - 1;
    e[j] = (T(1) + down(i) * e[i]) / up(i);
    s[j] = (T(1) + T(2) * hold(i) * e[j] + T(2) * down(i) * (e[i] + e[j]) + down(i) * (s[i] + T(2) * e[i] * e[j])) / up(i);
    v[j] = s[j] - e[j] * e[j];
  }
  HittingMoments& hm = rep.moments;
  MomentBounds& b = rep.bounds;
  hm.n = n;
  hm.k_max = k_max;
  hm.e.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  hm.var.assign(hm.e.size(), 0.0);
  T sum_e = 0, sum_v = 0;
  for (int k = 2; k <= k_max; ++k) {
    hm.e[k] = static_cast<double>(e[k]);
    hm.var[k] = static_cast<double>(v[k]);
    sum_e += e[k];
    sum_v += v[k];
    if (!(e[k] <= nn * nn / (T(k) * T(n - 2 * k)))) {
      b.e_literal = false;
      b.e_literal_failures.push_back(k);
    }
  }
  for (int k = 1; k < k_max; ++k)
    if (!(e[k + 1] <= nn * nn / (T(k) * T(n - 2 * k)))) b.e_shifted = false;
  for (int k = 2; k + 1 <= k_max; ++k)
    if (!(v[k + 1] <= T(k) / T(n - k) * v[k] + T(54) * nn * nn / (T(k) * T(k)))) b.v_recursion = false;
  b.v2 = k_max < 2 || v[2] <= nn * nn;
  hm.sum_e = static_cast<double>(sum_e);
  hm.sum_var = static_cast<double>(sum_v);
  b.sum_e_limit = n * std::log(static_cast<double>(n)) + n;
  b.sum_var_limit = 110.0 * n * n;
  b.sum_e = hm.sum_e <= b.sum_e_limit;
  b.sum_var = sum_v <= T(110) * nn * nn;
}

mp::cpp_int binomial(int n, int k) {
  mp::cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

MomentReport hitting_moments(int n) {
  if (n < 9) throw Error(ErrorCode::InvalidArgument, "hitting moments need n >= 9");
  MomentReport rep;
  if (n <= kExactMomentLimit) {
    moments_impl<mp::cpp_rational>(n, rep);
    rep.moments.exact = true;
  } else {
    moments_impl<long double>(n, rep);
  }
  return rep;
}

std::vector<double> bd_stationary(int n) {
  if (n < 2 || n > 1000) throw Error(ErrorCode::InvalidArgument, "bd_stationary needs 2 <= n <= 1000");
  const mp::cpp_int denom = (mp::cpp_int(1) << n) - 1;
  const mp::cpp_bin_float_100 d(denom);
  std::vector<double> pi(static_cast<std::size_t>(n) + 1, 0.0);
  mp::cpp_int c = 1;
  for (int k = 1; k <= n; ++k) {
    c = c * (n - k + 1) / k;
    pi[k] = static_cast<double>(mp::cpp_bin_float_100(c) / d);
  }
  return pi;
}

bool bd_detailed_balance_exact(int n) {
  if (n < 2 || n > 1000) throw Error(ErrorCode::InvalidArgument, "bd_stationary needs 2 <= n <= 1000");
  const mp::cpp_int denom = (mp::cpp_int(1) << n) - 1;
  const mp::cpp_rational scale(1, mp::cpp_int(n) * (n - 1));
  mp::cpp_rational total = 0;
  for (int k = 1; k <= n; ++k) {
    const mp::cpp_rational pk(binomial(n, k), denom);
    total += pk;
    if (k == n) break;
    const mp::cpp_rational pk1(binomial(n, k + 1), denom);
    const mp::cpp_rational flow_up = pk * mp::cpp_rational(k * (n - k)) * scale;
    const mp::cpp_rational flow_down = pk1 * mp::cpp_rational((k + 1) * k) * scale;
    if (flow_up != flow_down) return false;
  }
  return total == 1;
}

HittingSample simulate_hitting(int n, int k, std::size_t replicas, std::uint64_t seed) {
  if (k < 2 || k > n) throw Error(ErrorCode::InvalidArgument, "hitting target out of range");
  const BDChain bd{n};
  HittingSample out;
  out.times = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    int state = k - 1;
    double t = 0;
    while (state < k) {
      state = bd.step(state, rng.uniform());
      t += 1;
    }
    return t;
  });
  out.mean = mean_se(out.times);
  return out;
}

EscapeReport escape_experiment(int n, int k, int m, std::int64_t horizon, std::size_t replicas, std::uint64_t seed) {
  if (!(1 <= m && m < k && k <= n)) throw Error(ErrorCode::InvalidArgument, "escape needs 1 <= m < k <= n");
  const BDChain bd{n};
  auto hits = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    int state = k;
    for (std::int64_t t = 0; t < horizon; ++t) {
      state = bd.step(state, rng.uniform());
      if (state == m) return 1;
    }
    return 0;
  });
  EscapeReport rep;
  rep.replicas = replicas;
  for (int h : hits) rep.hits += static_cast<std::uint64_t>(h);
  rep.tail = static_cast<double>(rep.hits) / static_cast<double>(replicas);
  rep.ci = clopper_pearson(rep.hits, replicas, 0.99);
  const mp::cpp_bin_float_100 ratio = mp::cpp_bin_float_100(binomial(n, m)) / mp::cpp_bin_float_100(binomial(n, k));
  rep.bound = static_cast<double>(horizon) * static_cast<double>(ratio);
  rep.bound_ok = rep.ci.lo <= rep.bound;
  return rep;
}

namespace {

enum class MoveKind { Up, Hold, Down };

MoveKind classify(const FiniteGroup& g, const Subgroup& h, Element a, Element b, int s) {
  const bool a_in = h.contains(a), b_in = h.contains(b);
  if (a_in && !b_in) return MoveKind::Up;
  if (!a_in && !b_in && h.contains(g.mul(a, g.signed_power(b, s)))) return MoveKind::Down;
  return MoveKind::Hold;
}

// Triples (i, j, s) that take a site out of H into H.
std::int64_t down_triples(const FiniteGroup& g, const Subgroup& h, const std::vector<int>& cnt) {
  const int q = g.order();
  std::int64_t total = 0;
  for (int a = 0; a < q; ++a) {
    if (h.contains(static_cast<Element>(a)) || cnt[a] == 0) continue;
    for (int b = 0; b < q; ++b) {
      if (h.contains(static_cast<Element>(b))) continue;
      const std::int64_t pairs = static_cast<std::int64_t>(cnt[a]) * (cnt[b] - (a == b ? 1 : 0));
      if (pairs <= 0) continue;
      for (int s : {1, -1})
        if (h.contains(g.mul(static_cast<Element>(a), g.signed_power(static_cast<Element>(b), s)))) total += pairs;
    }
  }
  return total;
}

}  // namespace

DominationReport domination_check(const Configuration& sigma0, const Subgroup& h, std::int64_t steps,
                                  std::size_t replicas, std::uint64_t seed) {
  const FiniteGroup& g = sigma0.group();
  if (h.mask == g.full_mask()) throw Error(ErrorCode::InvalidArgument, "H must be a proper subgroup");
  if (!sigma0.is_generating()) throw Error(ErrorCode::NotGenerating, "start is not a generating tuple");
  const int n = sigma0.n();
  const std::int64_t total = 2LL * n * (n - 1);
  struct PathResult {
    std::uint64_t strict = 0;
  };
  auto paths = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    Configuration sigma = sigma0;
    CountTracker tracker(sigma);
    int x = n_non(sigma, h);
    int bd = x;
    PathResult res;
    for (std::int64_t t = 0; t < steps; ++t) {
      // One uniform rank decides both chains: PR up-moves come first, PR
      // down-moves last, and the comparison chain uses the same ordering.
      const std::int64_t up_x = 2LL * x * (n - x);
      const std::int64_t down_x = down_triples(g, h, tracker.counts());
      const std::int64_t rank = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
      const MoveKind want = rank < up_x ? MoveKind::Up : (rank >= total - down_x ? MoveKind::Down : MoveKind::Hold);
      StepSample mv;
      do {
        mv = sample_move(n, rng);
      } while (classify(g, h, sigma[mv.i], sigma[mv.j], mv.s) != want);
      const Element before = apply_move(sigma, mv);
      tracker.update(before, sigma[mv.i]);
      x += want == MoveKind::Up ? 1 : (want == MoveKind::Down ? -1 : 0);
      if (rank < 2LL * bd * (n - bd))
        ++bd;
      else if (rank >= total - 2LL * bd * (bd - 1))
        --bd;
      if (bd > x)
        throw Error(ErrorCode::DominationViolated,
                    "comparison chain exceeded n_non at step " + std::to_string(t + 1) + " of replica " + std::to_string(r));
      if (bd < x) ++res.strict;
    }
    return res;
  });
  DominationReport rep;
  rep.paths = replicas;
  rep.steps = steps;
  for (const auto& p : paths) {
    rep.strict_steps += p.strict;
    if (p.strict > 0)
      ++rep.strict_paths;
    else
      ++rep.equal_paths;
  }
  return rep;
}

bool BurnInResult::all_ok() const {
  for (const auto& t : tails)
    if (!t.bound_ok) return false;
  return true;
}

BurnInResult burnin_experiment(const Configuration& start, const BurnInConfig& cfg) {
  const FiniteGroup& g = start.group();
  const int n = start.n();
  const double nlogn = n * std::log(static_cast<double>(n));
  std::int64_t horizon = 0;
  for (double b : cfg.betas) horizon = std::max(horizon, static_cast<std::int64_t>(std::floor(nlogn + b * n)));
  struct Path {
    std::int64_t tau = -1;
    std::uint64_t exits = 0;
  };
  auto paths = run_replicas(cfg.replicas, [&](std::size_t r) {
    Rng rng(cfg.seed, r);
    Configuration sigma = start;
    CountTracker tracker(sigma);
    Path p;
    for (std::int64_t t = 0; t <= horizon; ++t) {
      if (in_S_non_counts(g, tracker.counts(), Ratio{1, 3})) {
        p.tau = t;
        break;
      }
      StepSample mv = sample_move(n, rng);
      const Element before = apply_move(sigma, mv);
      tracker.update(before, sigma[mv.i]);
    }
    if (p.tau >= 0)
      for (std::int64_t t = 0; t < cfg.persistence_steps; ++t) {
        StepSample mv = sample_move(n, rng);
        const Element before = apply_move(sigma, mv);
        tracker.update(before, sigma[mv.i]);
        if (!in_S_non_counts(g, tracker.counts(), Ratio{1, 6})) ++p.exits;
      }
    return p;
  });
  BurnInResult res;
  res.n = n;
  for (const auto& p : paths) {
    res.tau.push_back(p.tau);
    res.persistence_violations += p.exits;
  }
  for (double b : cfg.betas) {
    BurnInTail tail;
    tail.beta = b;
    tail.threshold = static_cast<std::int64_t>(std::floor(nlogn + b * n));
    for (auto tau : res.tau)
      if (tau < 0 || tau > tail.threshold) ++tail.exceed;
    tail.tail = static_cast<double>(tail.exceed) / static_cast<double>(cfg.replicas);
    tail.ci = clopper_pearson(tail.exceed, cfg.replicas, 0.99);
    tail.bound = 120.0 * g.order() / (b * b);
    tail.bound_ok = tail.ci.hi <= tail.bound;
    res.tails.push_back(tail);
  }
  return res;
}

void write_moments_csv(std::ostream& out, const MomentReport& rep) {
  const auto& m = rep.moments;
  out << "# n=" << m.n << " exact=" << (m.exact ? 1 : 0) << " sum_e=" << m.sum_e << " sum_var=" << m.sum_var << "\n";
  out << "k,e,var,e_bound\n";
  out.precision(17);
  for (int k = 2; k <= m.k_max; ++k)
    out << k << ',' << m.e[k] << ',' << m.var[k] << ','
        << static_cast<double>(m.n) * m.n / (static_cast<double>(k) * (m.n - 2 * k)) << "\n";
}

void write_burnin_csv(std::ostream& out, const BurnInResult& res) {
  out << "n,beta,threshold,exceed,tail,ci_hi,bound,ok\n";
  out.precision(10);
  for (const auto& t : res.tails)
    out << res.n << ',' << t.beta << ',' << t.threshold << ',' << t.exceed << ',' << t.tail << ',' << t.ci.hi << ','
        << t.bound << ',' << (t.bound_ok ? 1 : 0) << "\n";
}

}  // namespace prmix
