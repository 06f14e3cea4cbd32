#include "prmix/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "prmix/error.hpp"
#include "prmix/parallel.hpp"

namespace prmix {

CouplingParams CouplingParams::from_floor(int n, int q, std::int64_t p) {
  if (n < 2 || q < 1 || p < 0 || p * q * q > n) throw Error(ErrorCode::InvalidArgument, "invalid coupling parameters");
  return CouplingParams{n, q, p};
}

CouplingParams CouplingParams::from_delta(int n, int q, double delta) {
  const double x = (1.0 - delta) * n / (static_cast<double>(q) * q);
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw Error(ErrorCode::IntegralityViolated, "(1 - delta) n / Q^2 = " + std::to_string(x) + " is not an integer");
  return from_floor(n, q, static_cast<std::int64_t>(r));
}

CouplingParams coalescence_params(int n, int q) {
  const __int128 q2 = static_cast<__int128>(q) * q, q4 = q2 * q2;
  // Need 7 Q^4 p > n (7 Q^2 - 3) and 5 Q^4 p < n (5 Q^2 - 2).
  const __int128 lo = static_cast<__int128>(n) * (7 * q2 - 3);
  std::int64_t p = static_cast<std::int64_t>(lo / (7 * q4)) + 1;
  if (!(5 * q4 * p < static_cast<__int128>(n) * (5 * q2 - 2)))
    throw Error(ErrorCode::NoValidDelta, "no delta' in (2/(5Q^2), 3/(7Q^2)) makes (1 - delta') n / Q^2 integral for n = " +
                                             std::to_string(n));
  return CouplingParams::from_floor(n, q, p);
}

bool in_M_delta(const ProportionMatrix& m, const CouplingParams& par) {
  for (int v : m.entries())
    if (v < par.p) return false;
  return true;
}

std::string case_name(CouplingCase c) {
  switch (c) {
    case CouplingCase::Identical: return "identical";
    case CouplingCase::Independent: return "independent";
    case CouplingCase::I: return "i";
    case CouplingCase::IExceptionalDown: return "i_exceptional_down";
    case CouplingCase::IExceptionalUp: return "i_exceptional_up";
    case CouplingCase::II: return "ii";
    case CouplingCase::III: return "iii";
    case CouplingCase::IV: return "iv";
  }
  return "?";
}

ClassTable build_class_table(const FiniteGroup& g, const ProportionMatrix& m, const ProportionMatrix& mt,
                             const CouplingParams& par) {
  const int q = g.order();
  const std::int64_t p = par.p;
  ClassTable t;
  auto index_of_p = [&](int row, Element b) {
    for (std::size_t k = 0; k < t.classes.size(); ++k)
      if (t.classes[k].kind == SiteClass::P && t.classes[k].row == row && t.classes[k].v1 == b) return static_cast<int>(k);
    return -1;
  };
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      const Element e = static_cast<Element>(b);
      if (p > 0) t.classes.push_back({SiteClass::P, a, e, e, p});
      const std::int64_t common = std::min(m(a, b), mt(a, b)) - p;
      if (common > 0) t.classes.push_back({SiteClass::Q, a, e, e, common});
    }
  int first_r_row = -1;
  Element first_surplus = 0, first_deficit = 0;
  for (int a = 0; a < q; ++a) {
    std::vector<std::pair<Element, std::int64_t>> sur, def;
    for (int b = 0; b < q; ++b) {
      int d = m(a, b) - mt(a, b);
      if (d > 0) sur.emplace_back(static_cast<Element>(b), d);
      if (d < 0) def.emplace_back(static_cast<Element>(b), -d);
    }
    if (sur.empty()) continue;
    if (first_r_row < 0) {
      first_r_row = a;
      first_surplus = sur.front().first;
      first_deficit = def.front().first;
    }
    // Sorted pairing: i-th surplus site with i-th deficit site.
    std::size_t i = 0, j = 0;
    while (i < sur.size() && j < def.size()) {
      std::int64_t take = std::min(sur[i].second, def[j].second);
      t.classes.push_back({SiteClass::R, a, sur[i].first, def[j].first, take});
      sur[i].second -= take;
      def[j].second -= take;
      if (sur[i].second == 0) ++i;
      if (def[j].second == 0) ++j;
    }
  }
  if (first_r_row >= 0 && p > 0) {
    t.has_exceptional = true;
    t.a_star = first_r_row;
    t.b_star = first_surplus;
    t.b_star_prime = first_deficit;
    t.down_class = index_of_p(t.a_star, t.b_star);
    t.up_class = index_of_p(t.a_star, t.b_star_prime);
    const Element step = g.mul(g.inv(t.b_star), t.b_star_prime);
    t.down_pairs.assign(t.classes.size(), 0);
    t.up_pairs.assign(t.classes.size(), 0);
    std::int64_t down_total = 0, up_total = 0;
    for (std::size_t k = 0; k < t.classes.size(); ++k) {
      const SiteClass& c = t.classes[k];
      if (c.kind != SiteClass::P) continue;
      if (c.v1 == step) {
        t.down_pairs[k] = p * (p - (static_cast<int>(k) == t.down_class ? 1 : 0));
        down_total += t.down_pairs[k];
      }
      if (c.v1 == 0) {
        t.up_pairs[k] = p * (p - (static_cast<int>(k) == t.up_class ? 1 : 0));
        up_total += t.up_pairs[k];
      }
    }
    // Equal-size subsets for the bijection: trim the larger set from its first blocks.
    auto trim = [](std::vector<std::int64_t>& pairs, std::int64_t excess) {
      for (auto& x : pairs) {
        std::int64_t cut = std::min(x, excess);
        x -= cut;
        excess -= cut;
      }
    };
    if (down_total > up_total) trim(t.down_pairs, down_total - up_total);
    if (up_total > down_total) trim(t.up_pairs, up_total - down_total);
  }
  return t;
}

namespace {

struct PairEffect {
  CouplingCase kind;
  bool exceptional;
};

CouplingCase base_case(const SiteClass& k, const SiteClass& l) {
  const bool k_common = k.kind != SiteClass::R, l_common = l.kind != SiteClass::R;
  if (k_common && l_common) return CouplingCase::I;
  if (k.kind == SiteClass::P && l.kind == SiteClass::R) return CouplingCase::III;
  if (k.kind == SiteClass::R && l.kind == SiteClass::P) return CouplingCase::IV;
  return CouplingCase::II;
}

void apply_pair(const FiniteGroup& g, ProportionMatrix& m, ProportionMatrix& mt, const ClassTable& t, const SiteClass& k,
                const SiteClass& l, int s, CouplingCase kind) {
  switch (kind) {
    case CouplingCase::IExceptionalDown:
      m.move(k.row, k.v1, g.mul(k.v1, g.signed_power(l.v1, s)));
      return;
    case CouplingCase::IExceptionalUp:
      // The first chain's move multiplies by the identity.
      mt.move(t.a_star, t.b_star, t.b_star_prime);
      return;
    case CouplingCase::IV: {
      const Element target = g.mul(k.v1, g.signed_power(l.v1, s));
      m.move(k.row, k.v1, target);
      // Partner value c~ = (b~^-1 b c^s)^s gives b~ c~^s = b c^s.
      const Element ct = g.signed_power(g.mul(g.inv(k.v2), target), s);
      mt.move(k.row, k.v2, g.mul(k.v2, g.signed_power(ct, s)));
      return;
    }
    default:
      m.move(k.row, k.v1, g.mul(k.v1, g.signed_power(l.v1, s)));
      mt.move(k.row, k.v2, g.mul(k.v2, g.signed_power(l.v2, s)));
      return;
  }
}

std::size_t pick_class(const std::vector<SiteClass>& cls, std::int64_t u, int skip = -1) {
  for (std::size_t k = 0; k < cls.size(); ++k) {
    std::int64_t c = cls[k].count - (static_cast<int>(k) == skip ? 1 : 0);
    if (u < c) return k;
    u -= c;
  }
  throw Error(ErrorCode::ValidationFailed, "class sampling overran");
}

}  // namespace

void matrix_random_step(const FiniteGroup& g, ProportionMatrix& m, Rng& rng) {
  const int q = g.order(), n = m.n();
  std::int64_t u = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
  int a = 0, b = 0;
  for (int cell = 0; cell < q * q; ++cell) {
    if (u < m.entries()[cell]) {
      a = cell / q;
      b = cell % q;
      break;
    }
    u -= m.entries()[cell];
  }
  std::vector<int> col = m.col_sums();
  --col[b];
  std::int64_t v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - 1)));
  int d = 0;
  for (; d < q; ++d) {
    if (v < col[d]) break;
    v -= col[d];
  }
  const int s = rng.sign();
  m.move(a, b, g.mul(static_cast<Element>(b), g.signed_power(static_cast<Element>(d), s)));
}

CoupledStepResult coupled_step(const FiniteGroup& g, CoupledState& st, const CouplingParams& par, Rng& rng) {
  CoupledStepResult res;
  const std::int64_t d_before = half_l1(st.first, st.second);
  if (st.coalesced || d_before == 0) {
    matrix_random_step(g, st.first, rng);
    st.second = st.first;
    st.coalesced = true;
    res.kind = CouplingCase::Identical;
    return res;
  }
  if (!in_M_delta(st.first, par) || !in_M_delta(st.second, par)) {
    matrix_random_step(g, st.first, rng);
    matrix_random_step(g, st.second, rng);
    res.kind = CouplingCase::Independent;
  } else {
    const ClassTable t = build_class_table(g, st.first, st.second, par);
    const int n = st.first.n();
    const std::size_t ki = pick_class(t.classes, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n))));
    const std::size_t li =
        pick_class(t.classes, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - 1))), static_cast<int>(ki));
    const int s = rng.sign();
    const SiteClass& k = t.classes[ki];
    const SiteClass& l = t.classes[li];
    CouplingCase kind = base_case(k, l);
    if (kind == CouplingCase::I && s == 1 && t.has_exceptional) {
      const std::int64_t block = k.count * (l.count - (ki == li ? 1 : 0));
      if (static_cast<int>(ki) == t.down_class && t.down_pairs[li] > 0 &&
          static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(block))) < t.down_pairs[li])
        kind = CouplingCase::IExceptionalDown;
      else if (static_cast<int>(ki) == t.up_class && t.up_pairs[li] > 0 &&
               static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(block))) < t.up_pairs[li])
        kind = CouplingCase::IExceptionalUp;
    }
    apply_pair(g, st.first, st.second, t, k, l, s, kind);
    res.kind = kind;
  }
  const std::int64_t d_after = half_l1(st.first, st.second);
  res.delta_d = static_cast<int>(d_after - d_before);
  if (d_after == 0) st.coalesced = true;
  return res;
}

std::vector<JointOutcome> joint_law(const FiniteGroup& g, const CoupledState& st, const CouplingParams& par) {
  if (!in_M_delta(st.first, par) || !in_M_delta(st.second, par))
    throw Error(ErrorCode::OutsideMDelta, "a matrix has a cell below (1 - delta) n / Q^2");
  const std::int64_t d0 = half_l1(st.first, st.second);
  if (d0 == 0) throw Error(ErrorCode::DZero, "D = 0: the coupling is the identity");
  const ClassTable t = build_class_table(g, st.first, st.second, par);
  std::map<std::tuple<int, std::vector<int>, std::vector<int>>, std::pair<std::int64_t, int>> acc;
  auto record = [&](CouplingCase kind, const SiteClass& k, const SiteClass& l, int s, std::int64_t cnt) {
    if (cnt <= 0) return;
    ProportionMatrix m = st.first, mt = st.second;
    apply_pair(g, m, mt, t, k, l, s, kind);
    const int dd = static_cast<int>(half_l1(m, mt) - d0);
    auto& slot = acc[{static_cast<int>(kind), m.entries(), mt.entries()}];
    slot.first += cnt;
    slot.second = dd;
  };
  for (std::size_t ki = 0; ki < t.classes.size(); ++ki)
    for (std::size_t li = 0; li < t.classes.size(); ++li) {
      const SiteClass& k = t.classes[ki];
      const SiteClass& l = t.classes[li];
      const std::int64_t cnt = k.count * (l.count - (ki == li ? 1 : 0));
      if (cnt <= 0) continue;
      for (int s : {1, -1}) {
        CouplingCase kind = base_case(k, l);
        std::int64_t exc = 0;
        CouplingCase exc_kind = kind;
        if (kind == CouplingCase::I && s == 1 && t.has_exceptional) {
          if (static_cast<int>(ki) == t.down_class) {
            exc = t.down_pairs[li];
            exc_kind = CouplingCase::IExceptionalDown;
          } else if (static_cast<int>(ki) == t.up_class) {
            exc = t.up_pairs[li];
            exc_kind = CouplingCase::IExceptionalUp;
          }
        }
        record(exc_kind, k, l, s, exc);
        record(kind, k, l, s, cnt - exc);
      }
    }
  std::vector<JointOutcome> out;
  out.reserve(acc.size());
  const int q = g.order();
  for (auto& [key, val] : acc)
    out.push_back({static_cast<CouplingCase>(std::get<0>(key)), ProportionMatrix(q, std::get<1>(key)),
                   ProportionMatrix(q, std::get<2>(key)), val.second, val.first});
  return out;
}

bool CaseBreakdown::fluctuation_ok(const CouplingParams& par) const {
  const __int128 lhs = static_cast<__int128>(2) * par.n * nonzero;
  const __int128 rhs = static_cast<__int128>(par.p) * par.p * par.q * (par.n - 1);
  return lhs >= rhs;
}

CaseBreakdown case_breakdown(const FiniteGroup& g, const CoupledState& st, const CouplingParams& par) {
  CaseBreakdown cb;
  const std::int64_t n = st.first.n();
  cb.total = 2 * n * (n - 1);
  std::int64_t sum = 0;
  for (const auto& o : joint_law(g, st, par)) {
    const int k = static_cast<int>(o.kind);
    cb.count[k] += o.count;
    cb.delta_d_law[k][o.delta_d] += o.count;
    cb.drift_numerator += o.count * o.delta_d;
    if (o.delta_d != 0) cb.nonzero += o.count;
    sum += o.count;
  }
  if (sum != cb.total) throw Error(ErrorCode::ValidationFailed, "case probabilities do not sum to one");
  return cb;
}

namespace {

ProportionMatrix draw_start(const GroupPtr& g, const Configuration& ref, double r, Rng& rng, std::uint64_t budget) {
  for (std::uint64_t k = 0; k < budget; ++k) {
    StationarySample s = sample_stationary(g, ref.n(), rng);
    ProportionMatrix m = proportion_matrix(ref, s.config);
    if (in_S_star_matrix(m, r)) return m;
  }
  throw Error(ErrorCode::RejectionBudgetExceeded, "no stationary sample inside S_*(sigma*, R/sqrt(n))");
}

}  // namespace

CoalescenceResult coalescence_experiment(const GroupPtr& g, const Configuration& sigma_star, const CoalescenceConfig& cfg) {
  const int n = sigma_star.n(), q = g->order();
  CoalescenceResult res;
  res.params = coalescence_params(n, q);
  const double r = cfg.R / std::sqrt(static_cast<double>(n));
  const std::int64_t horizon = static_cast<std::int64_t>(std::floor(cfg.beta * n));
  res.d0_limit = std::sqrt(static_cast<double>(q)) * cfg.R * std::sqrt(static_cast<double>(n));
  const CouplingParams par = res.params;
  res.records = run_replicas(cfg.replicas, [&](std::size_t rep) {
    Rng rng(cfg.seed, rep);
    CoupledState st{draw_start(g, sigma_star, r, rng, cfg.start_budget), draw_start(g, sigma_star, r, rng, cfg.start_budget)};
    CoalescenceRecord rec;
    rec.replica = rep;
    rec.horizon = horizon;
    rec.d0 = half_l1(st.first, st.second);
    for (std::int64_t t = 0;; ++t) {
      if (st.coalesced || st.first == st.second) {
        rec.tau = t;
        rec.coalesced = true;
        break;
      }
      if (t >= horizon) break;
      coupled_step(*g, st, par, rng);
    }
    return rec;
  });
  std::uint64_t late = 0;
  for (const auto& rec : res.records) {
    if (!rec.coalesced) ++late;
    res.d0_max = std::max(res.d0_max, rec.d0);
    if (static_cast<double>(rec.d0) > res.d0_limit + 1e-9) ++res.d0_violations;
  }
  res.tail = static_cast<double>(late) / static_cast<double>(cfg.replicas);
  res.ci = clopper_pearson(late, cfg.replicas, 0.99);
  res.bound = 32.0 * q * q * cfg.R / std::sqrt(cfg.beta);
  res.bound_ok = res.ci.hi <= res.bound && res.d0_violations == 0;
  return res;
}

}  // namespace prmix
