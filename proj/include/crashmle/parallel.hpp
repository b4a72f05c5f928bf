#ifndef CRASHMLE_PARALLEL_HPP
#define CRASHMLE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace crashmle {

// Process-wide cap on worker threads (0 restores the hardware default).
void set_thread_limit(unsigned limit);
[[nodiscard]] unsigned thread_limit();

// Fixed-size row blocks used by every likelihood reduction. Partial sums are
// combined in block order, so results do not depend on the thread count.
inline constexpr std::size_t kRowBlock = 256;

[[nodiscard]] inline std::size_t block_count(std::size_t n, std::size_t block = kRowBlock) {
  return (n + block - 1) / block;
}

// Calls fn(index) for index in [0, count). Work is spread over up to
// thread_limit() threads; calls made from inside a worker run inline.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace crashmle

#endif  // CRASHMLE_PARALLEL_HPP
