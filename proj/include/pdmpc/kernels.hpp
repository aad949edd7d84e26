#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdmpc::kernels {

enum class Backend { Scalar, Avx2, Neon };

/// Dense double-precision primitives used by the LP tableau inner loops.
/// Each backend provides the same contract; variants may reassociate
/// reductions, so dot/sum agree with the scalar reference only to rounding.
struct Kernels {
  void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a*x
  void (*scale)(double a, double* x, std::size_t n);                  // x *= a
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max_value)(const double* x, std::size_t n);  // n >= 1
  Backend backend;
};

const char* backend_name(Backend b);

/// Scalar reference kernels; always present.
const Kernels& scalar();

/// A specific backend, or nullptr when it was not compiled in or the
/// running CPU lacks the instructions.
const Kernels* available(Backend b);

/// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();

/// The dispatch target: best available backend, resolved once. The
/// PDMPC_KERNELS environment variable (scalar|avx2|neon|auto) overrides.
const Kernels& active();

// span conveniences for the common call sites
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> x) {
  active().scale(a, x.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) {
  return active().sum(x.data(), x.size());
}
inline double max_value(std::span<const double> x) {
  return active().max_value(x.data(), x.size());
}

}  // namespace pdmpc::kernels
