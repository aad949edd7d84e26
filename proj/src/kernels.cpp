#include "pdmpc/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace pdmpc::kernels {

namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

const Kernels kScalar{axpy_scalar, scale_scalar, dot_scalar,
                      sum_scalar,  max_scalar,   Backend::Scalar};

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) && defined(PDMPC_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__) && defined(PDMPC_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels* resolve_env_choice() {
  const char* env = std::getenv("PDMPC_KERNELS");
  if (env == nullptr || std::strcmp(env, "auto") == 0) return nullptr;
  if (std::strcmp(env, "scalar") == 0) return &kScalar;
  if (std::strcmp(env, "avx2") == 0) return available(Backend::Avx2);
  if (std::strcmp(env, "neon") == 0) return available(Backend::Neon);
  return nullptr;  // unknown value: fall through to auto
}

}  // namespace

#if defined(PDMPC_HAVE_AVX2)
const Kernels* avx2_kernels();  // defined in kernels_avx2.cpp
#endif
#if defined(PDMPC_HAVE_NEON)
const Kernels* neon_kernels();  // defined in kernels_neon.cpp
#endif

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

const Kernels& scalar() { return kScalar; }

const Kernels* available(Backend b) {
  if (!cpu_supports(b)) return nullptr;
  switch (b) {
    case Backend::Scalar:
      return &kScalar;
    case Backend::Avx2:
#if defined(PDMPC_HAVE_AVX2)
      return avx2_kernels();
#else
      return nullptr;
#endif
    case Backend::Neon:
#if defined(PDMPC_HAVE_NEON)
      return neon_kernels();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  for (Backend b : {Backend::Avx2, Backend::Neon})
    if (available(b) != nullptr) out.push_back(b);
  return out;
}

const Kernels& active() {
  static const Kernels* chosen = [] {
    if (const Kernels* forced = resolve_env_choice()) return forced;
    if (const Kernels* k = available(Backend::Avx2)) return k;
    if (const Kernels* k = available(Backend::Neon)) return k;
    return &kScalar;
  }();
  return *chosen;
}

}  // namespace pdmpc::kernels
