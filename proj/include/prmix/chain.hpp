#pragma once

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "prmix/group.hpp"
#include "prmix/rng.hpp"

namespace prmix {

class Configuration {
 public:
  Configuration() = default;
  // Checks element range only; use initial() for starting states.
  Configuration(GroupPtr group, std::vector<Element> sites);
  // Throws NotGenerating unless the site values generate the group.
  static Configuration initial(GroupPtr group, std::vector<Element> sites);

  const FiniteGroup& group() const { return *group_; }
  const GroupPtr& group_ptr() const { return group_; }
  int n() const { return static_cast<int>(sites_.size()); }
  Element operator[](int i) const { return sites_[static_cast<std::size_t>(i)]; }
  const std::vector<Element>& sites() const { return sites_; }
  void set(int i, Element v) { sites_[static_cast<std::size_t>(i)] = v; }

  std::uint64_t support_mask() const;
  bool is_generating() const;

  friend bool operator==(const Configuration& x, const Configuration& y) { return x.sites_ == y.sites_; }

 private:
  GroupPtr group_;
  std::vector<Element> sites_;
};

struct StepSample {
  int i = 0;
  int j = 1;
  int s = 1;  // +1 or -1
};

// i uniform on [n], j uniform on [n] minus {i}, s a fair sign.
StepSample sample_move(int n, Rng& rng);
// sigma(i) <- sigma(i) sigma(j)^s; returns the previous value of sigma(i).
Element apply_move(Configuration& sigma, const StepSample& move);
StepSample step(Configuration& sigma, Rng& rng);

// Calls obs(t, sigma) at t = 0 and after every `every` steps; stops early
// when obs returns false. Returns the number of steps taken.
template <class Observer>
std::int64_t run_trajectory(Configuration& sigma, std::int64_t steps, Rng& rng, Observer&& obs, std::int64_t every = 1) {
  if (!obs(std::int64_t{0}, static_cast<const Configuration&>(sigma))) return 0;
  for (std::int64_t t = 1; t <= steps; ++t) {
    step(sigma, rng);
    if (t % every == 0 && !obs(t, static_cast<const Configuration&>(sigma))) return t;
  }
  return steps;
}

struct IncrementReport {
  std::vector<double> closed_form;
  std::vector<double> brute_force;
  // The drift without the i != j corrections; not exact for finite n.
  std::vector<double> mean_field;
};

// Exact E[n_a(t+1) - n_a(t) | sigma] from the counts alone.
std::vector<double> expected_increment_closed(const FiniteGroup& g, std::span<const int> counts);
std::vector<double> expected_increment_mean_field(const FiniteGroup& g, std::span<const int> counts);
std::vector<double> expected_increment_brute(const Configuration& sigma);
IncrementReport expected_increment(const Configuration& sigma);

// Generators of the minimal generating set at the first k sites, identity elsewhere.
Configuration star_config(const GroupPtr& g, int n);

struct StationarySample {
  Configuration config;
  std::uint64_t attempts = 0;
};

StationarySample sample_stationary(const GroupPtr& g, int n, Rng& rng, std::uint64_t budget = 1'000'000);
Configuration uniform_tuple(const GroupPtr& g, int n, Rng& rng);

}  // namespace prmix
