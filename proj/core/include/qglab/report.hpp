#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace qglab {

/// Scientific notation with 12 significant digits ("1.00000000000e+00").
/// Non-finite values print as "nan", "inf", "-inf".
std::string format_number(double value);

/// Round-trip decimal with 17 significant digits.
std::string format_exact(double value);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Number of worker threads: explicit request if > 0, else the
/// QGLAB_THREADS environment variable, else hardware concurrency.
unsigned resolve_thread_count(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Jobs must not
/// share mutable state. The first exception thrown by a job is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace qglab
