#pragma once

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

namespace prmix {

// Runs fn(r) for r = 0..count-1 and returns results in replica order.
// Each replica must derive its own RNG from r, so the output does not
// depend on scheduling or thread count.
template <class Fn>
auto run_replicas(std::size_t count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long r = 0; r < n; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Serial reference with the same contract.
template <class Fn>
auto run_replicas_serial(std::size_t count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out;
  out.reserve(count);
  for (std::size_t r = 0; r < count; ++r) out.push_back(fn(r));
  return out;
}

}  // namespace prmix
