#include "h4g/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "h4g/errors.hpp"

namespace h4g::kernels {

namespace detail {
const Table& avx2_kernels() noexcept;
const Table& neon_kernels() noexcept;
}  // namespace detail

const Table* avx2_table() noexcept {
#if defined(H4G_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

// Advanced SIMD is mandatory on AArch64.
const Table* neon_table() noexcept {
#if defined(H4G_HAVE_NEON)
  return &detail::neon_kernels();
#else
  return nullptr;
#endif
}

const Table* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return &scalar_table();
    case Isa::avx2: return avx2_table();
    case Isa::neon: return neon_table();
  }
  return nullptr;
}

std::vector<Isa> available() {
  std::vector<Isa> out{Isa::scalar};
  if (avx2_table() != nullptr) out.push_back(Isa::avx2);
  if (neon_table() != nullptr) out.push_back(Isa::neon);
  return out;
}

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

namespace {

const Table* widest() noexcept {
  if (const Table* t = avx2_table()) return t;
  if (const Table* t = neon_table()) return t;
  return &scalar_table();
}

const Table* initial() noexcept {
  const char* env = std::getenv("H4G_KERNELS");
  if (env == nullptr || *env == '\0') return widest();
  try {
    const Table* t = table_for(parse_isa(env));
    return t != nullptr ? t : widest();
  } catch (const UsageError&) {
    return widest();
  }
}

std::atomic<const Table*>& slot() noexcept {
  static std::atomic<const Table*> current{initial()};
  return current;
}

}  // namespace

Isa parse_isa(std::string_view text) {
  if (text == "scalar") return Isa::scalar;
  if (text == "avx2") return Isa::avx2;
  if (text == "neon") return Isa::neon;
  if (text == "auto") return widest()->isa;
  throw UsageError("unknown kernel ISA '" + std::string(text) + "' (expected scalar, avx2, neon, auto)");
}

const Table& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void select(Isa isa) {
  const Table* t = table_for(isa);
  if (t == nullptr) {
    throw UsageError("kernel ISA '" + std::string(name(isa)) + "' is not available on this machine");
  }
  slot().store(t, std::memory_order_relaxed);
}

}  // namespace h4g::kernels
