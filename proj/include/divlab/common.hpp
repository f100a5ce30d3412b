#pragma once
// Shared basics: error type, deterministic number formatting, small helpers.

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace divlab {

enum class ErrKind {
  precondition,  // structural invariant violated by inputs
  evaluation,    // coefficient evaluation produced non-finite values
  schema,        // config/spec validation failure
  parse,         // config text could not be parsed
  solver,        // linear solver failed to converge
  data,          // malformed data file / CSV
  internal,      // contradiction or bug detected at runtime
};

class Error : public std::runtime_error {
public:
  Error(ErrKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrKind kind() const { return kind_; }

private:
  ErrKind kind_;
};

inline const char* err_kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::precondition: return "precondition";
    case ErrKind::evaluation: return "evaluation";
    case ErrKind::schema: return "schema";
    case ErrKind::parse: return "parse";
    case ErrKind::solver: return "solver";
    case ErrKind::data: return "data";
    case ErrKind::internal: return "internal";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrKind k, const std::string& msg) {
  throw Error(k, msg);
}

// Deterministic, locale-independent formatting. Reports and CSVs are written
// exclusively through these so reruns diff clean.
inline std::string fmt_g(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

inline std::string fmt_i(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

// splitmix64: used to derive independent per-path / per-shell RNG seeds from
// the single master seed. Simple, well-mixed, and stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x51ed2701ull));
}

inline double sqr(double x) { return x * x; }

inline double norm2(const double* x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

inline bool all_finite(const double* x, int n) {
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace divlab
