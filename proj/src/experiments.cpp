#include "prmix/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "prmix/birth_death.hpp"
#include "prmix/chain.hpp"
#include "prmix/coupling.hpp"
#include "prmix/error.hpp"
#include "prmix/inference.hpp"
#include "prmix/lumped.hpp"
#include "prmix/parallel.hpp"
#include "prmix/repr.hpp"
#include "prmix/rng.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (replicas < 1) throw Error(ErrorCode::InvalidArgument, "replicas must be >= 1");
  if (n.empty()) throw Error(ErrorCode::InvalidArgument, "n list is empty");
  for (int v : n)
    if (v < 2) throw Error(ErrorCode::InvalidArgument, "every n must be >= 2");
  if (mode != "exact" && mode != "mc" && mode != "both")
    throw Error(ErrorCode::InvalidArgument, "mode must be exact, mc or both");
  for (double r : R)
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "R values must be positive");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.group = j.value("group", c.group);
  if (j.contains("n")) {
    if (j["n"].is_array())
      c.n = j["n"].get<std::vector<int>>();
    else
      c.n = {j["n"].get<int>()};
  }
  c.seed = j.value("seed", c.seed);
  c.replicas = j.value("replicas", c.replicas);
  c.betas = j.value("betas", c.betas);
  if (j.contains("R")) {
    if (j["R"].is_array())
      c.R = j["R"].get<std::vector<double>>();
    else
      c.R = {j["R"].get<double>()};
  }
  c.grid_betas = j.value("grid_betas", c.grid_betas);
  c.out_dir = j.value("out", c.out_dir);
  c.mode = j.value("mode", c.mode);
  if (j.contains("irreps") && !j["irreps"].is_null()) c.irrep_file = j["irreps"].get<std::string>();
  c.persistence = j.value("persistence", c.persistence);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"group", c.group},   {"n", c.n},         {"seed", c.seed},
         {"replicas", c.replicas}, {"betas", c.betas}, {"R", c.R},
         {"grid_betas", c.grid_betas}, {"out", c.out_dir}, {"mode", c.mode},
         {"persistence", c.persistence}};
  j["irreps"] = c.irrep_file ? json(*c.irrep_file) : json(nullptr);
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad config JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& tag, int n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return splitmix64(seed ^ splitmix64(h + static_cast<std::uint64_t>(n)));
}

std::vector<std::int64_t> cutoff_grid(int n, const std::vector<double>& betas) {
  const double base = 1.5 * n * std::log(static_cast<double>(n));
  std::vector<std::int64_t> out;
  for (double b : betas) out.push_back(std::max<std::int64_t>(0, std::llround(base + b * n)));
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double re_trace_stat(std::span<const int> counts, const Irrep& rho) {
  double n = 0.0;
  for (int c : counts) n += c;
  std::vector<double> v(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) v[a] = counts[a] / n;
  return fourier_coeff(v, rho).trace().real() / rho.dim;
}

CouplingParams upper_params(int n, int q) {
  try {
    return coalescence_params(n, q);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoValidDelta) throw;
    const double qq = static_cast<double>(q) * q;
    return CouplingParams::from_floor(n, q, static_cast<std::int64_t>(std::floor(n * (1.0 - 2.0 / (5.0 * qq)) / qq)));
  }
}

void advance(Configuration& sigma, CountTracker& tracker, std::int64_t steps, Rng& rng) {
  for (std::int64_t k = 0; k < steps; ++k) {
    StepSample mv = sample_move(sigma.n(), rng);
    const Element before = apply_move(sigma, mv);
    tracker.update(before, sigma[mv.i]);
  }
}

}  // namespace

McTvBounds mc_tv_bounds(const GroupPtr& g, int n, const std::vector<std::int64_t>& times, std::size_t replicas,
                        std::uint64_t seed, const std::optional<std::string>& irrep_file) {
  const RepSet reps = nontrivial_irreps(g, irrep_file);
  const Irrep& rho = reps[0];
  const Configuration start = star_config(g, n);
  McTvBounds out;
  out.times = times;
  std::vector<std::size_t> order(times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  const std::int64_t t_max = times.empty() ? 0 : *std::max_element(times.begin(), times.end());

  // Lower bound: the statistic along trajectories against stationary samples.
  auto traj = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    Configuration sigma = start;
    CountTracker tracker(sigma);
    std::vector<double> f(times.size());
    std::int64_t now = 0;
    for (std::size_t k : order) {
      advance(sigma, tracker, times[k] - now, rng);
      now = times[k];
      f[k] = re_trace_stat(tracker.counts(), rho);
    }
    return f;
  });
  auto stat = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, substream(r, 1));
    return re_trace_stat(counts(sample_stationary(g, n, rng).config), rho);
  });
  const double margin = 2.0 * dkw_margin(replicas, 0.025);
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> col(replicas);
    for (std::size_t r = 0; r < replicas; ++r) col[r] = traj[r][k];
    out.lower.push_back(std::max(0.0, ks_distance(col, stat) - margin));
  }

  // Upper bound: burn in to a reference, then couple matrices against a stationary partner.
  out.burn_in = static_cast<std::int64_t>(std::ceil(n * std::log(static_cast<double>(n))));
  const CouplingParams par = upper_params(n, g->order());
  out.p = par.p;
  const std::int64_t horizon = std::max<std::int64_t>(0, t_max - out.burn_in);
  auto coal = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, substream(r, 2));
    Configuration sigma = start;
    CountTracker tracker(sigma);
    advance(sigma, tracker, out.burn_in, rng);
    const Configuration partner = sample_stationary(g, n, rng).config;
    CoupledState st{proportion_matrix(sigma, sigma), proportion_matrix(sigma, partner)};
    for (std::int64_t s = 0; s <= horizon; ++s) {
      if (st.coalesced || st.first == st.second) return s;
      if (s == horizon) break;
      coupled_step(*g, st, par, rng);
    }
    return std::int64_t{-1};
  });
  for (std::int64_t t : times) {
    if (t < out.burn_in) {
      out.upper.push_back(1.0);
      continue;
    }
    std::uint64_t late = 0;
    for (auto s : coal)
      if (s < 0 || s > t - out.burn_in) ++late;
    out.upper.push_back(clopper_pearson(late, replicas, 0.99).hi);
  }
  return out;
}

FourierDecay fourier_decay(const GroupPtr& g, int n, std::size_t replicas, std::uint64_t seed,
                           const std::optional<std::string>& irrep_file) {
  const RepSet reps = nontrivial_irreps(g, irrep_file);
  const int q = g->order();
  const double nlogn = n * std::log(static_cast<double>(n));
  FourierDecay out;
  out.horizon = static_cast<std::int64_t>(std::ceil(0.5 * nlogn));
  const std::int64_t stride = std::max(1, n / 60);
  for (std::int64_t t = 0; t <= out.horizon; t += stride) out.times.push_back(t);
  if (out.times.back() != out.horizon) out.times.push_back(out.horizon);
  const Configuration start = star_config(g, n);

  struct Path {
    std::vector<double> max_y, max_x;
  };
  auto paths = run_replicas(replicas, [&](std::size_t r) {
    Rng rng(seed, r);
    Configuration sigma = start;
    CountTracker tracker(sigma);
    advance(sigma, tracker, static_cast<std::int64_t>(2.0 * nlogn), rng);
    const std::int64_t budget = static_cast<std::int64_t>(50.0 * nlogn);
    std::int64_t extra = 0;
    while (!in_S_star_counts(tracker.counts(), 1.0 / (4.0 * q))) {
      if (++extra > budget) throw Error(ErrorCode::NotConverged, "pre-roll did not reach S_*(1/(4Q))");
      advance(sigma, tracker, 1, rng);
    }
    const Configuration ref = sigma;
    ProportionMatrix m = proportion_matrix(ref, sigma);
    const std::vector<int> rows = m.row_sums();
    Path p;
    std::int64_t now = 0;
    for (std::int64_t t : out.times) {
      for (; now < t; ++now) {
        StepSample mv = sample_move(n, rng);
        const Element before = apply_move(sigma, mv);
        m.move(ref[mv.i], before, sigma[mv.i]);
      }
      double my = 0.0, mx = 0.0;
      std::vector<double> col(q);
      const auto cs = m.col_sums();
      for (int b = 0; b < q; ++b) col[b] = static_cast<double>(cs[b]) / n;
      for (std::size_t k = 0; k < reps.size(); ++k) {
        mx = std::max(mx, hs_norm(fourier_coeff(col, reps[k])));
        for (int a = 0; a < q; ++a) {
          std::vector<double> w(q);
          for (int b = 0; b < q; ++b) w[b] = static_cast<double>(m(a, b)) / rows[a];
          my = std::max(my, hs_norm(fourier_row(w, reps[k])));
        }
      }
      p.max_y.push_back(my);
      p.max_x.push_back(mx);
    }
    return p;
  });
  std::vector<double> fit_t, fit_y;
  const double floor_level = 5.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    std::vector<double> ys(replicas), xs(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
      ys[r] = paths[r].max_y[k];
      xs[r] = paths[r].max_x[k];
    }
    const MeanSE my = mean_se(ys);
    out.mean_max_y.push_back(my.mean);
    out.se_max_y.push_back(my.se);
    out.mean_max_x.push_back(mean_se(xs).mean);
    if (my.mean > floor_level) {
      fit_t.push_back(static_cast<double>(out.times[k]));
      fit_y.push_back(std::log(my.mean));
    }
  }
  for (const auto& p : paths) {
    out.initial_max_y = std::max(out.initial_max_y, p.max_y.front());
    out.final_max_y.push_back(p.max_y.back());
  }
  out.fit_points = fit_t.size();
  if (fit_t.size() >= 3) {
    const LinearFit f = linear_fit(fit_t, fit_y);
    out.slope = f.slope;
    out.slope_se = f.slope_se;
  }
  return out;
}

ExperimentReport run_cutoff_profile(const ExperimentConfig& cfg) {
  cfg.validate();
  const GroupPtr g = build_group(parse_group_spec(cfg.group));
  ExperimentReport rep;
  rep.name = "cutoff";
  std::ostringstream csv;
  csv << "n,beta,t,d,method\n";
  json per_n = json::array();
  std::map<double, std::vector<double>> by_beta;
  for (int n : cfg.n) {
    const auto grid = cutoff_grid(n, cfg.grid_betas);
    json cell{{"n", n}};
    std::vector<double> exact_d;
    if (cfg.mode != "mc") {
      const Configuration start = star_config(g, n);
      const LumpedChain chain = build_lumped(g, n, start);
      const ProportionMatrix m0 = proportion_matrix(start, start);
      const std::int64_t t_max = *std::max_element(grid.begin(), grid.end());
      const auto curve = tv_curve(chain, m0, t_max);
      bool monotone = true;
      for (std::size_t t = 1; t < curve.size(); ++t)
        if (curve[t] > curve[t - 1] + tv_error_bound(static_cast<std::int64_t>(t))) monotone = false;
      const auto tm = mixing_times(chain, m0, {0.25, 0.75});
      const double nlogn = n * std::log(static_cast<double>(n));
      cell["states"] = chain.size();
      cell["t_mix_quarter"] = tm[0];
      cell["t_mix_three_quarters"] = tm[1];
      cell["ratio"] = tm[0] / nlogn;
      cell["window"] = tm[0] - tm[1];
      cell["monotone"] = monotone;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        exact_d.push_back(curve[grid[k]]);
        by_beta[cfg.grid_betas[k]].push_back(curve[grid[k]]);
        csv << n << ',' << fmt(cfg.grid_betas[k]) << ',' << grid[k] << ',' << fmt(curve[grid[k]]) << ",exact\n";
      }
    }
    if (cfg.mode != "exact") {
      const McTvBounds b = mc_tv_bounds(g, n, grid, cfg.replicas, cell_seed(cfg.seed, "cutoff", n), cfg.irrep_file);
      bool consistent = true;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        csv << n << ',' << fmt(cfg.grid_betas[k]) << ',' << grid[k] << ',' << fmt(b.lower[k]) << ",mc_lower\n";
        csv << n << ',' << fmt(cfg.grid_betas[k]) << ',' << grid[k] << ',' << fmt(b.upper[k]) << ",mc_upper\n";
        if (!exact_d.empty() && (b.lower[k] > exact_d[k] + 1e-12 || b.upper[k] < exact_d[k] - 1e-12)) consistent = false;
      }
      cell["mc_burn_in"] = b.burn_in;
      cell["mc_coupling_p"] = b.p;
      if (!exact_d.empty()) cell["mc_brackets_exact"] = consistent;
    }
    per_n.push_back(cell);
  }
  double spread = 0.0;
  if (cfg.n.size() > 1)
    for (auto& [beta, ds] : by_beta) {
      auto [lo, hi] = std::minmax_element(ds.begin(), ds.end());
      spread = std::max(spread, *hi - *lo);
    }
  rep.summary = {{"experiment", "cutoff"}, {"config", config_to_json(cfg)}, {"per_n", per_n}};
  if (!by_beta.empty()) rep.summary["collapse_spread"] = spread;
  rep.summary["labels"] = {{"exact", "lumped-chain distance"},
                           {"mc_lower", "statistic KS distance minus DKW margins (95%)"},
                           {"mc_upper", "99% upper CI of non-coalescence after burn-in"}};
  rep.csv["cutoff.csv"] = csv.str();
  return rep;
}

ExperimentReport run_burnin(const ExperimentConfig& cfg) {
  cfg.validate();
  const GroupPtr g = build_group(parse_group_spec(cfg.group));
  ExperimentReport rep;
  rep.name = "burnin";
  std::ostringstream tails, taus;
  tails << "n,beta,threshold,exceed,tail,ci_hi,bound,ok\n";
  taus << "n,replica,tau\n";
  json per_n = json::array();
  for (int n : cfg.n) {
    BurnInConfig bc;
    bc.betas = cfg.betas;
    bc.replicas = cfg.replicas;
    bc.seed = cell_seed(cfg.seed, "burnin", n);
    bc.persistence_steps = cfg.persistence ? static_cast<std::int64_t>(n) * n : 0;
    const BurnInResult res = burnin_experiment(star_config(g, n), bc);
    for (const auto& t : res.tails)
      tails << n << ',' << fmt(t.beta) << ',' << t.threshold << ',' << t.exceed << ',' << fmt(t.tail) << ','
            << fmt(t.ci.hi) << ',' << fmt(t.bound) << ',' << (t.bound_ok ? 1 : 0) << "\n";
    for (std::size_t r = 0; r < res.tau.size(); ++r) taus << n << ',' << r << ',' << res.tau[r] << "\n";
    json cell{{"n", n}, {"all_ok", res.all_ok()}};
    if (cfg.persistence) cell["persistence_violations"] = res.persistence_violations;
    per_n.push_back(cell);
    rep.bounds_ok = rep.bounds_ok && res.all_ok();
  }
  rep.summary = {{"experiment", "burnin"}, {"config", config_to_json(cfg)}, {"per_n", per_n},
                 {"bounds_ok", rep.bounds_ok}};
  rep.csv["burnin_tails.csv"] = tails.str();
  rep.csv["burnin_tau.csv"] = taus.str();
  return rep;
}

ExperimentReport run_fourier_decay(const ExperimentConfig& cfg) {
  cfg.validate();
  const GroupPtr g = build_group(parse_group_spec(cfg.group));
  ExperimentReport rep;
  rep.name = "fourier";
  std::ostringstream csv, ex;
  csv << "n,t,mean_max_y,se_max_y,mean_max_x\n";
  ex << "n,R,fraction_above\n";
  json per_n = json::array();
  const RepSet reps = nontrivial_irreps(g, cfg.irrep_file);
  int max_dim = 1;
  for (const auto& r : reps.irreps()) max_dim = std::max(max_dim, r.dim);
  for (int n : cfg.n) {
    const FourierDecay fd = fourier_decay(g, n, cfg.replicas, cell_seed(cfg.seed, "fourier", n), cfg.irrep_file);
    for (std::size_t k = 0; k < fd.times.size(); ++k)
      csv << n << ',' << fd.times[k] << ',' << fmt(fd.mean_max_y[k]) << ',' << fmt(fd.se_max_y[k]) << ','
          << fmt(fd.mean_max_x[k]) << "\n";
    std::vector<double> Rs = cfg.R;
    std::sort(Rs.begin(), Rs.end());
    json fractions = json::array();
    double prev = 2.0;
    bool decreasing = true;
    for (double R : Rs) {
      const double level = R / std::sqrt(static_cast<double>(n));
      double above = 0;
      for (double y : fd.final_max_y)
        if (y > level) above += 1;
      above /= static_cast<double>(fd.final_max_y.size());
      if (above > prev) decreasing = false;
      prev = above;
      ex << n << ',' << fmt(R) << ',' << fmt(above) << "\n";
      fractions.push_back({{"R", R}, {"fraction", above}});
    }
    const double lo = -1.25 / n, hi = -0.75 / n;
    const bool slope_ok = fd.fit_points >= 3 && fd.slope >= lo && fd.slope <= hi;
    const bool initial_ok = fd.initial_max_y <= std::sqrt(static_cast<double>(max_dim)) + 1e-12;
    per_n.push_back({{"n", n},
                     {"slope", fd.slope},
                     {"slope_se", fd.slope_se},
                     {"slope_times_n", fd.slope * n},
                     {"fit_points", fd.fit_points},
                     {"slope_ok", slope_ok},
                     {"initial_ok", initial_ok},
                     {"horizon", fd.horizon},
                     {"exceedance", fractions},
                     {"exceedance_decreasing", decreasing}});
    rep.bounds_ok = rep.bounds_ok && slope_ok && initial_ok;
  }
  rep.summary = {{"experiment", "fourier"}, {"config", config_to_json(cfg)}, {"per_n", per_n},
                 {"bounds_ok", rep.bounds_ok}};
  rep.csv["fourier.csv"] = csv.str();
  rep.csv["fourier_exceedance.csv"] = ex.str();
  return rep;
}

ExperimentReport run_lower_bound(const ExperimentConfig& cfg) {
  cfg.validate();
  const GroupPtr g = build_group(parse_group_spec(cfg.group));
  const int q = g->order();
  ExperimentReport rep;
  rep.name = "lower";
  std::ostringstream burn, tv, conc;
  burn << "n,R,T1,exceed,tail,ci_hi,bound,ok\n";
  tv << "n,beta,T,p_chain,p_chain_ci_hi,p_stationary,p_stationary_ci_lo,tv_lower,exact_d\n";
  conc << "n,R,outside_fraction,ci_hi\n";
  json per_n = json::array();
  for (int n : cfg.n) {
    const double nlogn = n * std::log(static_cast<double>(n));
    const std::uint64_t seed = cell_seed(cfg.seed, "lower", n);
    const Configuration start = star_config(g, n);
    json cell{{"n", n}};

    // (a) identity sites after T1 = floor(n ln n - R n).
    std::vector<std::int64_t> t1;
    for (double R : cfg.R) t1.push_back(static_cast<std::int64_t>(std::floor(nlogn - R * n)));
    std::vector<std::size_t> order(t1.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t1[a] < t1[b]; });
    auto hits = run_replicas(cfg.replicas, [&](std::size_t r) {
      Rng rng(seed, r);
      Configuration sigma = start;
      CountTracker tracker(sigma);
      std::vector<int> h(t1.size(), 0);
      std::int64_t now = 0;
      for (std::size_t k : order) {
        const std::int64_t target = std::max<std::int64_t>(0, t1[k]);
        advance(sigma, tracker, target - now, rng);
        now = target;
        h[k] = 3 * (n - tracker.counts()[0]) >= n ? 1 : 0;
      }
      return h;
    });
    json lemma = json::array();
    for (std::size_t k = 0; k < t1.size(); ++k) {
      std::uint64_t ex = 0;
      for (const auto& h : hits) ex += static_cast<std::uint64_t>(h[k]);
      const Interval ci = clopper_pearson(ex, cfg.replicas, 0.99);
      const double bound = 4.0 * q * q / (cfg.R[k] * cfg.R[k]);
      const bool ok = ci.hi <= bound || bound >= 1.0;
      rep.bounds_ok = rep.bounds_ok && ok;
      burn << n << ',' << fmt(cfg.R[k]) << ',' << std::max<std::int64_t>(0, t1[k]) << ',' << ex << ','
           << fmt(static_cast<double>(ex) / cfg.replicas) << ',' << fmt(ci.hi) << ',' << fmt(bound) << ','
           << (ok ? 1 : 0) << "\n";
      lemma.push_back({{"R", cfg.R[k]}, {"tail_ci_hi", ci.hi}, {"bound", bound}, {"ok", ok}});
    }
    cell["identity_tail"] = lemma;

    // Stationary samples shared by (b) and the concentration check.
    auto stat = run_replicas(cfg.replicas, [&](std::size_t r) {
      Rng rng(seed, substream(r, 3));
      return counts(sample_stationary(g, n, rng).config);
    });

    // (b) S_*(beta/sqrt(n)) at T = T1 + T2.
    std::optional<LumpedChain> chain;
    std::vector<double> curve;
    std::vector<std::int64_t> T;
    for (double b : cfg.betas)
      T.push_back(std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(nlogn - b * n))) +
                  std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(0.5 * nlogn - b * n))));
    if (q == 2) {
      chain = build_lumped(g, n, start);
      std::vector<std::int64_t> grid = cutoff_grid(n, {-8.0, 8.0});
      std::int64_t t_max = std::max(grid[0], grid[1]);
      for (auto t : T) t_max = std::max(t_max, t);
      curve = tv_curve(*chain, proportion_matrix(start, start), t_max);
      cell["exact_d_minus_8n"] = curve[grid[0]];
      cell["exact_d_plus_8n"] = curve[grid[1]];
    }
    std::vector<std::size_t> border(T.size());
    for (std::size_t k = 0; k < border.size(); ++k) border[k] = k;
    std::sort(border.begin(), border.end(), [&](std::size_t a, std::size_t b) { return T[a] < T[b]; });
    auto inside = run_replicas(cfg.replicas, [&](std::size_t r) {
      Rng rng(seed, substream(r, 4));
      Configuration sigma = start;
      CountTracker tracker(sigma);
      std::vector<int> in(T.size(), 0);
      std::int64_t now = 0;
      for (std::size_t k : border) {
        advance(sigma, tracker, T[k] - now, rng);
        now = T[k];
        in[k] = in_S_star_counts(tracker.counts(), cfg.betas[k] / std::sqrt(static_cast<double>(n))) ? 1 : 0;
      }
      return in;
    });
    json lb = json::array();
    for (std::size_t k = 0; k < T.size(); ++k) {
      const double r = cfg.betas[k] / std::sqrt(static_cast<double>(n));
      std::uint64_t in_chain = 0, in_stat = 0;
      for (const auto& v : inside) in_chain += static_cast<std::uint64_t>(v[k]);
      for (const auto& c : stat) in_stat += in_S_star_counts(c, r) ? 1 : 0;
      const Interval pc = clopper_pearson(in_chain, cfg.replicas, 0.99);
      const Interval ps = clopper_pearson(in_stat, cfg.replicas, 0.99);
      const double lower = std::max(0.0, ps.lo - pc.hi);
      const double ed = curve.empty() ? std::nan("") : curve[T[k]];
      tv << n << ',' << fmt(cfg.betas[k]) << ',' << T[k] << ',' << fmt(static_cast<double>(in_chain) / cfg.replicas)
         << ',' << fmt(pc.hi) << ',' << fmt(static_cast<double>(in_stat) / cfg.replicas) << ',' << fmt(ps.lo) << ','
         << fmt(lower) << ',' << (curve.empty() ? std::string("") : fmt(ed)) << "\n";
      json row{{"beta", cfg.betas[k]}, {"T", T[k]}, {"tv_lower", lower}};
      if (!curve.empty()) row["exact_d"] = ed;
      lb.push_back(row);
    }
    cell["tv_lower"] = lb;

    std::vector<double> Rs = cfg.R;
    std::sort(Rs.begin(), Rs.end());
    json cj = json::array();
    for (double R : Rs) {
      const double r = R / std::sqrt(static_cast<double>(n));
      std::uint64_t out = 0;
      for (const auto& c : stat) out += in_S_star_counts(c, r) ? 0 : 1;
      const Interval ci = clopper_pearson(out, cfg.replicas, 0.99);
      conc << n << ',' << fmt(R) << ',' << fmt(static_cast<double>(out) / cfg.replicas) << ',' << fmt(ci.hi) << "\n";
      cj.push_back({{"R", R}, {"outside", static_cast<double>(out) / cfg.replicas}});
    }
    cell["stationary_concentration"] = cj;
    per_n.push_back(cell);
  }
  rep.summary = {{"experiment", "lower"}, {"config", config_to_json(cfg)}, {"per_n", per_n},
                 {"bounds_ok", rep.bounds_ok}};
  rep.csv["lower_identity_tail.csv"] = burn.str();
  rep.csv["lower_tv.csv"] = tv.str();
  rep.csv["lower_concentration.csv"] = conc.str();
  return rep;
}

json environment_metadata() {
  json j;
#ifdef __VERSION__
  j["compiler"] = __VERSION__;
#endif
  j["cplusplus"] = static_cast<long>(__cplusplus);
  j["omp_max_threads"] = omp_get_max_threads();
  j["rng"] = "mt19937_64 seeded by splitmix64";
  return j;
}

void write_report(const ExperimentReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [name, body] : rep.csv) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + name);
    out << body;
  }
  json s = rep.summary;
  s["environment"] = environment_metadata();
  std::ofstream out(fs::path(dir) / (rep.name + "_summary.json"));
  if (!out) throw Error(ErrorCode::Io, "cannot write summary");
  out << s.dump(2) << "\n";
}

}  // namespace prmix
