#include "qpcrfbi/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace qpcrfbi::kernels {
namespace {

bool avx2_usable() {
#if defined(QPCRFBI_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Backend* backend_by_name(std::string_view name) {
  if (name == "scalar") return &scalar_backend();
#if defined(QPCRFBI_HAVE_AVX2)
  if (name == "avx2" && avx2_usable()) return &avx2_backend();
#endif
  return nullptr;
}

const Backend* detect() {
  if (const char* env = std::getenv("QPCRFBI_KERNELS")) {
    if (const Backend* b = backend_by_name(env)) return b;
  }
#if defined(QPCRFBI_HAVE_AVX2)
  if (avx2_usable()) return &avx2_backend();
#endif
  return &scalar_backend();
}

std::atomic<const Backend*> g_active{nullptr};

}  // namespace

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = detect();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

bool select(std::string_view name) {
  const Backend* b = backend_by_name(name);
  if (!b) return false;
  g_active.store(b, std::memory_order_release);
  return true;
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> names{"scalar"};
  if (avx2_usable()) names.push_back("avx2");
  return names;
}

}  // namespace qpcrfbi::kernels
