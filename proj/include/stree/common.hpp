#ifndef STREE_COMMON_HPP
#define STREE_COMMON_HPP

#include <quadmath.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace stree {

inline constexpr const char* kVersion = "0.3.0";

/// Binary128 scalar used where double cannot resolve small kernel values
/// against the size of the individual spectral terms.
using Quad = __float128;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::size_t required)
      : std::runtime_error(what), required_(required) {}
  std::size_t required() const { return required_; }

 private:
  std::size_t required_;
};

/// Numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

// Scalar shims so templated code can call exp/log/... uniformly on double and Quad.
inline double sexp(double x) { return std::exp(x); }
inline double slog(double x) { return std::log(x); }
inline double ssqrt(double x) { return std::sqrt(x); }
inline double spow(double x, double y) { return std::pow(x, y); }
inline double sabs(double x) { return std::fabs(x); }
inline Quad sexp(Quad x) { return expq(x); }
inline Quad slog(Quad x) { return logq(x); }
inline Quad ssqrt(Quad x) { return sqrtq(x); }
inline Quad spow(Quad x, Quad y) { return powq(x, y); }
inline Quad sabs(Quad x) { return fabsq(x); }

/// SplitMix64 mixing step; also the per-sample seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: stream `stream` of master seed `seed`.
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}
  explicit CounterRng(std::uint64_t seed) : CounterRng(seed, 0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  /// Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace stree

namespace Eigen {
template <>
struct NumTraits<stree::Quad> : GenericNumTraits<stree::Quad> {
  typedef stree::Quad Real;
  typedef stree::Quad NonInteger;
  typedef stree::Quad Nested;
  typedef stree::Quad Literal;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 0,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 8
  };
  static inline Real epsilon() { return FLT128_EPSILON; }
  static inline Real dummy_precision() { return 1e-30; }
  static inline Real highest() { return FLT128_MAX; }
  static inline Real lowest() { return -FLT128_MAX; }
  static inline int digits10() { return 33; }
};
}  // namespace Eigen

#endif  // STREE_COMMON_HPP
