#pragma once

#include <cstddef>
#include <cstdint>

#include "fairhil/data_table.hpp"

namespace fairhil {

inline constexpr const char* kSynthTarget = "result";
inline constexpr const char* kSynthPositive = "accepted";
inline constexpr std::size_t kSynthColumns = 26;

// Seeded synthetic loan-application table: 25 features plus the binary
// `result` target (designated, positive label "accepted"). Deterministic for
// a given (seed, n). The generating model is documented in synth.cpp.
DataTable synth_loans(std::uint64_t seed, std::size_t n);

}  // namespace fairhil
