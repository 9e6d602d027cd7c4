#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sapgan/kernels/kernels.hpp"

namespace sapgan::kernels {

#ifdef SAPGAN_HAVE_AVX2
namespace avx2 {
extern const KernelTable<float> kTableF32;
extern const KernelTable<double> kTableF64;
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SAPGAN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("SAPGAN_ISA"); env && std::string(env) == "scalar") return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

template <>
const KernelTable<float>* avx2_table<float>() {
#ifdef SAPGAN_HAVE_AVX2
  if (cpu_has_avx2()) return &avx2::kTableF32;
#endif
  return nullptr;
}

template <>
const KernelTable<double>* avx2_table<double>() {
#ifdef SAPGAN_HAVE_AVX2
  if (cpu_has_avx2()) return &avx2::kTableF64;
#endif
  return nullptr;
}

template <class T>
const KernelTable<T>& active() {
  if (selected().load(std::memory_order_relaxed) == Isa::avx2) {
    if (const auto* t = avx2_table<T>()) return *t;
  }
  return scalar_table<T>();
}

template const KernelTable<float>& active<float>();
template const KernelTable<double>& active<double>();

Isa active_isa() { return active<float>().isa; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && avx2_table<float>() == nullptr)
    throw std::runtime_error("AVX2 kernels are not available on this build/CPU");
  selected().store(isa);
}

}  // namespace sapgan::kernels
