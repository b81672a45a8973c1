#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"
#include "psvrg/error.hpp"

namespace psvrg::kernels {
namespace {

Isa detect() {
  if (const char* env = std::getenv("PSVRG_KERNELS")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
#ifdef PSVRG_HAVE_AVX2
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{&table_for(detect())};
  return table;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#ifdef PSVRG_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_supported(isa)) throw ArgumentError("kernel ISA not supported on this CPU");
#ifdef PSVRG_HAVE_AVX2
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (isa_supported(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

Isa active_isa() {
  slot();
  return isa_slot().load(std::memory_order_relaxed);
}

void set_active_isa(Isa isa) {
  const KernelTable& t = table_for(isa);
  slot().store(&t, std::memory_order_relaxed);
  isa_slot().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

}  // namespace psvrg::kernels
