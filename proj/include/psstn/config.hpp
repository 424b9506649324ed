#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

namespace psstn {

/// Largest number of entries any dense matrix is allowed to have.
inline constexpr std::uint64_t kDefaultDenseGuard = 100'000'000;

/// Name of the environment variable that overrides kDefaultDenseGuard.
inline constexpr const char* kDenseGuardEnv = "PSSTN_DENSE_GUARD";

/// Active dense guard: PSSTN_DENSE_GUARD when set to a positive integer,
/// kDefaultDenseGuard otherwise. Read on every call.
inline std::uint64_t dense_guard() {
  if (const char* env = std::getenv(kDenseGuardEnv)) {
    try {
      const auto value = std::stoull(env);
      if (value > 0) return value;
    } catch (...) {
    }
  }
  return kDefaultDenseGuard;
}

}  // namespace psstn
