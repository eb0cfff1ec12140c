#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <random>

namespace teichlab {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

/// Error codes mirrored in CLI exit handling.
enum class ErrorCode {
  budget_exceeded,
  non_convergence,
  rank_deficient,
  out_of_chart,
  degenerate_metric,
  solver_divergence,
  max_iterations_exceeded,
  line_search_failure,
  config_invalid,
  cache_corrupt,
  invalid_argument,
};

struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::out_of_chart: return "out_of_chart";
    case ErrorCode::degenerate_metric: return "degenerate_metric";
    case ErrorCode::solver_divergence: return "solver_divergence";
    case ErrorCode::max_iterations_exceeded: return "max_iterations_exceeded";
    case ErrorCode::line_search_failure: return "line_search_failure";
    case ErrorCode::config_invalid: return "config_invalid";
    case ErrorCode::cache_corrupt: return "cache_corrupt";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

inline double sqr(double x) { return x * x; }
inline double norm2(const Complex& z) { return std::norm(z); }

/// FNV-1a, used for content-addressed cache keys and config digests.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a_hex(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return std::string(buf);
}

/// Deterministic RNG: every call site derives its own stream from the run
/// seed and a site label, so draws do not depend on evaluation order.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, const std::string& site) {
  return std::mt19937_64(seed ^ fnv1a(site));
}

}  // namespace teichlab
