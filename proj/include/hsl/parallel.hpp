#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace hsl {

/// Worker count: HSL_THREADS if set to a positive integer, else the hardware
/// concurrency.
inline unsigned thread_budget() {
  if (const char* env = std::getenv("HSL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Evaluates f(0..count-1) and returns the results in index order. Nested
/// calls run serially on the calling worker.
template <class F>
auto parallel_map(std::size_t count, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  const unsigned workers = detail::in_parallel_region
                               ? 1u
                               : static_cast<unsigned>(std::min<std::size_t>(thread_budget(), count));
  std::vector<std::optional<T>> slots(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) slots[i].emplace(f(i));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
      detail::in_parallel_region = true;
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          slots[i].emplace(f(i));
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
      detail::in_parallel_region = false;
    };
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace hsl
