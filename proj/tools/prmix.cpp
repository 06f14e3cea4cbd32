#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "prmix/birth_death.hpp"
#include "prmix/chain.hpp"
#include "prmix/coupling.hpp"
#include "prmix/error.hpp"
#include "prmix/experiments.hpp"
#include "prmix/lumped.hpp"
#include "prmix/repr.hpp"
#include "prmix/statistics.hpp"

using nlohmann::json;
using namespace prmix;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::size_t replicas = 200;
  std::string out;
  std::string config;
};

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::string& body) {
  if (out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + out);
  f << body;
}

json subgroup_json(const FiniteGroup& g) {
  json subs = json::array();
  for (const auto& h : g.proper_subgroups()) {
    json el = json::array();
    for (Element e : h.elements()) el.push_back(g.original_label()[e]);
    subs.push_back(el);
  }
  return subs;
}

Configuration reference_in_S_star(const GroupPtr& g, int n, Rng& rng) {
  const double r = 1.0 / (4.0 * g->order());
  for (int k = 0; k < 100000; ++k) {
    StationarySample s = sample_stationary(g, n, rng);
    if (in_S_star(s.config, r)) return s.config;
  }
  throw Error(ErrorCode::RejectionBudgetExceeded, "no stationary sample in S_*(1/(4Q))");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"product replacement chain: simulation and exact analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals gl;
  app.add_option("--seed", gl.seed, "master seed");
  app.add_option("--replicas", gl.replicas, "Monte Carlo replicas")->check(CLI::PositiveNumber);
  app.add_option("--out", gl.out, "output file (or directory for experiments)");
  app.add_option("--config", gl.config, "JSON experiment config");

  std::string spec = "Z2";
  std::optional<std::string> irrep_file;
  int n = 0;

  auto* group = app.add_subcommand("group", "group structure: subgroups, generators");
  group->add_option("spec", spec, "Z6, Z2xZ3, S3, D4, table:<file>")->required();

  auto* irreps = app.add_subcommand("irreps", "validate irreps; optional gap certificates");
  irreps->add_option("spec", spec)->required();
  irreps->add_option("--irreps", irrep_file, "irrep JSON file");
  std::optional<double> gap_c;
  irreps->add_option("--gap", gap_c, "certify gamma over S_non(c)");
  std::string export_path;
  irreps->add_option("--export", export_path, "write irreps as JSON");

  auto* simulate = app.add_subcommand("simulate", "run one trajectory, print counts");
  simulate->add_option("spec", spec)->required();
  simulate->add_option("--n", n)->required();
  std::int64_t steps = 1000, every = 1;
  simulate->add_option("--steps", steps);
  simulate->add_option("--every", every)->check(CLI::PositiveNumber);
  std::string start_kind = "star";
  simulate->add_option("--start", start_kind)->check(CLI::IsMember({"star", "stationary"}));

  auto* lumped = app.add_subcommand("lumped", "exact distance curve of the matrix chain");
  lumped->add_option("spec", spec)->required();
  lumped->add_option("--n", n)->required();
  std::int64_t t_max = -1;
  lumped->add_option("--t-max", t_max, "default: 3 n ln n");
  bool connectivity = false;
  lumped->add_flag("--connectivity", connectivity);

  auto* couple = app.add_subcommand("couple", "coalescence of the matrix coupling");
  couple->add_option("spec", spec)->required();
  couple->add_option("--n", n)->required();
  CoalescenceConfig cc;
  couple->add_option("--R", cc.R);
  couple->add_option("--beta", cc.beta);

  auto* bd = app.add_subcommand("bd", "comparison chain moments and bounds");
  bd->add_option("--n", n)->required();

  auto* experiment = app.add_subcommand("experiment", "configured experiments");
  std::string which;
  experiment->add_option("name", which)->required()->check(CLI::IsMember({"cutoff", "burnin", "fourier", "lower"}));
  std::optional<std::string> exp_group, exp_mode;
  std::vector<int> exp_n;
  experiment->add_option("--group", exp_group);
  experiment->add_option("--n", exp_n);
  experiment->add_option("--mode", exp_mode)->check(CLI::IsMember({"exact", "mc", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*group) {
      const GroupPtr g = build_group(parse_group_spec(spec));
      json j{{"name", g->name()}, {"order", g->order()}, {"abelian", g->is_abelian()}};
      json gens = json::array();
      for (Element e : g->minimal_generating_set()) gens.push_back(g->original_label()[e]);
      j["minimal_generating_set"] = gens;
      j["proper_subgroups"] = subgroup_json(*g);
      emit(gl.out, j.dump(2) + "\n");
      return 0;
    }
    if (*irreps) {
      const GroupPtr g = build_group(parse_group_spec(spec));
      const RepSet reps = nontrivial_irreps(g, irrep_file);
      json j = json::array();
      for (const auto& rho : reps.irreps()) {
        json r{{"label", rho.label}, {"dim", rho.dim}};
        if (gap_c) {
          const GapCertificate cert = gap_certificate(*g, rho, *gap_c);
          r["gap"] = cert.value;
          r["certified"] = cert.certified;
        }
        j.push_back(r);
      }
      if (!export_path.empty()) {
        std::ofstream f(export_path);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + export_path);
        f << irreps_to_json_text(reps);
      }
      emit(gl.out, j.dump(2) + "\n");
      return 0;
    }
    if (*simulate) {
      const GroupPtr g = build_group(parse_group_spec(spec));
      Rng rng(gl.seed, 0);
      Configuration sigma = start_kind == "star" ? star_config(g, n) : sample_stationary(g, n, rng).config;
      std::ostringstream csv;
      csv << "t";
      for (int a = 0; a < g->order(); ++a) csv << ",n_" << g->original_label()[a];
      csv << ",min_n_non\n";
      run_trajectory(
          sigma, steps, rng,
          [&](std::int64_t t, const Configuration& s) {
            const auto c = counts(s);
            csv << t;
            for (int v : c) csv << ',' << v;
            csv << ',' << min_n_non(*g, c) << "\n";
            return true;
          },
          every);
      emit(gl.out, csv.str());
      return 0;
    }
    if (*lumped) {
      const GroupPtr g = build_group(parse_group_spec(spec));
      const Configuration start = star_config(g, n);
      const LumpedChain chain = build_lumped(g, n, start);
      const ProportionMatrix m0 = proportion_matrix(start, start);
      if (t_max < 0) t_max = static_cast<std::int64_t>(std::ceil(3.0 * n * std::log(static_cast<double>(n))));
      if (connectivity) {
        const ConnectivityReport rep = connectivity_report(chain, m0);
        std::cerr << json{{"states", rep.states},
                          {"reachable_from_start", rep.reachable_from_start},
                          {"reaching_start", rep.reaching_start},
                          {"irreducible", rep.irreducible}}
                         .dump()
                  << "\n";
      }
      std::ostringstream csv;
      write_curve_csv(csv, chain, tv_curve(chain, m0, t_max));
      emit(gl.out, csv.str());
      return 0;
    }
    if (*couple) {
      const GroupPtr g = build_group(parse_group_spec(spec));
      cc.replicas = gl.replicas;
      cc.seed = gl.seed;
      Rng rng(gl.seed, substream(0, 99));
      const Configuration ref = reference_in_S_star(g, n, rng);
      const CoalescenceResult res = coalescence_experiment(g, ref, cc);
      std::ostringstream csv;
      csv << "replica,tau,horizon,coalesced,d0\n";
      for (const auto& r : res.records)
        csv << r.replica << ',' << r.tau << ',' << r.horizon << ',' << (r.coalesced ? 1 : 0) << ',' << r.d0 << "\n";
      emit(gl.out, csv.str());
      std::cerr << json{{"p", res.params.p},     {"delta", res.params.delta()}, {"tail", res.tail},
                        {"ci_hi", res.ci.hi},     {"bound", res.bound},          {"d0_max", res.d0_max},
                        {"d0_limit", res.d0_limit}, {"bound_ok", res.bound_ok}}
                       .dump()
                << "\n";
      return res.bound_ok ? 0 : 1;
    }
    if (*bd) {
      const MomentReport rep = hitting_moments(n);
      std::ostringstream csv;
      write_moments_csv(csv, rep);
      emit(gl.out, csv.str());
      const MomentBounds& b = rep.bounds;
      std::cerr << json{{"e_literal", b.e_literal},
                        {"e_literal_failures", b.e_literal_failures},
                        {"e_shifted", b.e_shifted},
                        {"sum_e", b.sum_e},
                        {"v2", b.v2},
                        {"v_recursion", b.v_recursion},
                        {"sum_var", b.sum_var}}
                       .dump()
                << "\n";
      return b.all_literal() ? 0 : 1;
    }
    if (*experiment) {
      ExperimentConfig cfg = gl.config.empty() ? ExperimentConfig{} : load_config(gl.config);
      if (app.get_option("--seed")->count()) cfg.seed = gl.seed;
      if (app.get_option("--replicas")->count()) cfg.replicas = gl.replicas;
      if (app.get_option("--out")->count()) cfg.out_dir = gl.out;
      if (exp_group) cfg.group = *exp_group;
      if (!exp_n.empty()) cfg.n = exp_n;
      if (exp_mode) cfg.mode = *exp_mode;
      cfg.validate();
      ExperimentReport rep;
      if (which == "cutoff") rep = run_cutoff_profile(cfg);
      if (which == "burnin") rep = run_burnin(cfg);
      if (which == "fourier") rep = run_fourier_decay(cfg);
      if (which == "lower") rep = run_lower_bound(cfg);
      if (!cfg.out_dir.empty())
        write_report(rep, cfg.out_dir);
      else
        std::cout << rep.summary.dump(2) << "\n";
      return rep.bounds_ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
