#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hiercoll {

/// Round-robin striping of a shared file over array_count disk arrays with
/// stripe_size-byte stripes: stripe i lives on array i mod array_count.
struct StripeLayout {
  std::int64_t stripe_size = 1;
  int array_count = 1;
};

inline void validate_layout(const StripeLayout& layout) {
  if (layout.stripe_size <= 0) throw std::invalid_argument("stripe layout: stripe_size must be > 0");
  if (layout.array_count < 1) throw std::invalid_argument("stripe layout: array_count must be >= 1");
}

/// Distinct arrays covered by the byte interval [start_offset, start_offset + read_bytes),
/// capped at the array count.
inline int arrays_touched(std::int64_t read_bytes, const StripeLayout& layout,
                          std::int64_t start_offset) {
  validate_layout(layout);
  if (read_bytes < 0) throw std::invalid_argument("arrays_touched: read_bytes must be >= 0");
  if (start_offset < 0) throw std::invalid_argument("arrays_touched: start_offset must be >= 0");
  if (read_bytes == 0) return 0;
  const std::int64_t first = start_offset / layout.stripe_size;
  const std::int64_t last = (start_offset + read_bytes - 1) / layout.stripe_size;
  return static_cast<int>(std::min<std::int64_t>(last - first + 1, layout.array_count));
}

/// arrays_touched maximized over the stripe phase of the start offset:
/// min(D, floor((M + s - 2)/s) + 1), i.e. ceil(M/s) plus one extra stripe
/// whenever a misaligned start can straddle a boundary.
inline int worst_case_arrays_touched(std::int64_t read_bytes, const StripeLayout& layout) {
  validate_layout(layout);
  if (read_bytes < 0) throw std::invalid_argument("arrays_touched: read_bytes must be >= 0");
  if (read_bytes == 0) return 0;
  const std::int64_t stripes = (read_bytes + layout.stripe_size - 2) / layout.stripe_size + 1;
  return static_cast<int>(std::min<std::int64_t>(stripes, layout.array_count));
}

/// Upper bound on processes concurrently hitting one array when procs readers
/// each pull read_bytes and spread uniformly over the arrays:
/// ceil(N/D) * arrays-per-read. aligned assumes stripe-aligned reads;
/// otherwise the worst stripe phase is charged.
inline std::int64_t per_array_load(std::int64_t procs, std::int64_t read_bytes,
                                   const StripeLayout& layout, bool aligned = false) {
  validate_layout(layout);
  if (procs < 1) throw std::invalid_argument("per_array_load: procs must be >= 1");
  const std::int64_t readers_per_array =
      (procs + layout.array_count - 1) / layout.array_count;
  const int spread = aligned ? arrays_touched(read_bytes, layout, 0)
                             : worst_case_arrays_touched(read_bytes, layout);
  return readers_per_array * spread;
}

} // namespace hiercoll
