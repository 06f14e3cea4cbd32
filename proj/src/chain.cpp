#include "prmix/chain.hpp"

#include "prmix/error.hpp"
#include "prmix/statistics.hpp"

namespace prmix {

Configuration::Configuration(GroupPtr group, std::vector<Element> sites) : group_(std::move(group)), sites_(std::move(sites)) {
  for (Element v : sites_)
    if (v >= group_->order()) throw Error(ErrorCode::InvalidArgument, "site value out of range");
}

Configuration Configuration::initial(GroupPtr group, std::vector<Element> sites) {
  Configuration c(std::move(group), std::move(sites));
  if (!c.is_generating()) throw Error(ErrorCode::NotGenerating, "initial configuration does not generate the group");
  return c;
}

std::uint64_t Configuration::support_mask() const {
  std::uint64_t m = 0;
  for (Element v : sites_) m |= std::uint64_t{1} << v;
  return m;
}

bool Configuration::is_generating() const { return group_->generates(support_mask()); }

StepSample sample_move(int n, Rng& rng) {
  StepSample m;
  m.i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  m.j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
  if (m.j >= m.i) ++m.j;
  m.s = rng.sign();
  return m;
}

Element apply_move(Configuration& sigma, const StepSample& move) {
  const FiniteGroup& g = sigma.group();
  Element old = sigma[move.i];
  sigma.set(move.i, g.mul(old, g.signed_power(sigma[move.j], move.s)));
  return old;
}

StepSample step(Configuration& sigma, Rng& rng) {
  StepSample m = sample_move(sigma.n(), rng);
  apply_move(sigma, m);
  return m;
}

std::vector<double> expected_increment_closed(const FiniteGroup& g, std::span<const int> counts) {
  const int q = g.order();
  long long n = 0;
  for (int c : counts) n += c;
  std::vector<double> out(q);
  const double denom = 2.0 * static_cast<double>(n) * static_cast<double>(n - 1);
  for (int a = 0; a < q; ++a) {
    // Ordered pairs i != j with sigma(i) sigma(j)^s = a, summed over both signs.
    long long hits = 0;
    for (int c = 0; c < q; ++c) {
      hits += static_cast<long long>(counts[g.mul(a, g.inv(c))]) * counts[c];
      hits += static_cast<long long>(counts[g.mul(a, c)]) * counts[c];
    }
    for (int b = 0; b < q; ++b)
      if (g.mul(b, b) == a) hits -= counts[b];
    if (a == 0) hits -= n;
    out[a] = static_cast<double>(hits) / denom - static_cast<double>(counts[a]) / static_cast<double>(n);
  }
  return out;
}

std::vector<double> expected_increment_mean_field(const FiniteGroup& g, std::span<const int> counts) {
  const int q = g.order();
  long long n = 0;
  for (int c : counts) n += c;
  std::vector<double> out(q);
  const double denom = 2.0 * static_cast<double>(n) * static_cast<double>(n - 1);
  for (int a = 0; a < q; ++a) {
    long long hits = 0;
    for (int b = 0; b < q; ++b) {
      hits += static_cast<long long>(counts[g.mul(a, g.inv(b))]) * counts[b];
      hits += static_cast<long long>(counts[g.mul(a, b)]) * counts[b];
    }
    out[a] = static_cast<double>(hits) / denom - static_cast<double>(counts[a]) / static_cast<double>(n);
  }
  return out;
}

std::vector<double> expected_increment_brute(const Configuration& sigma) {
  const FiniteGroup& g = sigma.group();
  const int n = sigma.n(), q = g.order();
  std::vector<long long> total(q, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int s : {1, -1}) {
        Element before = sigma[i];
        Element after = g.mul(before, g.signed_power(sigma[j], s));
        --total[before];
        ++total[after];
      }
    }
  std::vector<double> out(q);
  const double moves = 2.0 * n * (n - 1.0);
  for (int a = 0; a < q; ++a) out[a] = static_cast<double>(total[a]) / moves;
  return out;
}

IncrementReport expected_increment(const Configuration& sigma) {
  std::vector<int> c = counts(sigma);
  return {expected_increment_closed(sigma.group(), c), expected_increment_brute(sigma),
          expected_increment_mean_field(sigma.group(), c)};
}

Configuration star_config(const GroupPtr& g, int n) {
  const auto& gens = g->minimal_generating_set();
  if (n < static_cast<int>(gens.size()) || n < 2)
    throw Error(ErrorCode::NTooSmall, "n = " + std::to_string(n) + " is below the generating set size " +
                                          std::to_string(gens.size()) + " (or below 2)");
  std::vector<Element> sites(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < gens.size(); ++k) sites[k] = gens[k];
  return Configuration::initial(g, std::move(sites));
}

Configuration uniform_tuple(const GroupPtr& g, int n, Rng& rng) {
  std::vector<Element> sites(static_cast<std::size_t>(n));
  for (auto& v : sites) v = static_cast<Element>(rng.below(static_cast<std::uint64_t>(g->order())));
  return Configuration(g, std::move(sites));
}

StationarySample sample_stationary(const GroupPtr& g, int n, Rng& rng, std::uint64_t budget) {
  for (std::uint64_t k = 1; k <= budget; ++k) {
    Configuration c = uniform_tuple(g, n, rng);
    if (c.is_generating()) return {std::move(c), k};
  }
  throw Error(ErrorCode::RejectionBudgetExceeded,
              "no generating tuple after " + std::to_string(budget) + " draws (n = " + std::to_string(n) + ")");
}

}  // namespace prmix
