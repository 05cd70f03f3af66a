/*
 * Copyright 2026 The trafficseq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Dense double-precision kernels used by the recurrent models and the
// correlogram. Each ISA provides one KernelTable; `active()` resolves the best
// table for the running CPU once, on first use.
//
// All matrices are row-major and densely packed.

#include <cstddef>
#include <span>
#include <string_view>

namespace trafficseq::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += A x, A is rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += A^T x, A is rows x cols, x has `rows` entries, y has `cols`
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // A += alpha * x y^T, x has `rows` entries, y has `cols`
  void (*ger)(double alpha, const double* x, std::size_t rows, const double* y, std::size_t cols,
              double* a);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the ISA was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

// Best available table. Honors TRAFFICSEQ_SIMD=scalar|avx2|neon when set to an
// available ISA.
const KernelTable& active() noexcept;

// Overrides the dispatch for the rest of the process. Returns false if the
// requested ISA is unavailable (selection is left unchanged).
bool select(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

// Span conveniences over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace trafficseq::simd
