// Copyright 2026 The Biasforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "screen_kernels.h"

#include <immintrin.h>

namespace biasforge::internal {

namespace {

// Each kernel sums per-lane partials (at most ceil(d/8) terms per lane), then
// reduces the lanes, then adds a sequential tail of fewer than 16 terms. The
// deepest chain has fewer than FloatSumRelativeError's 18 + ceil(d/8)
// roundings.

inline float LoadElement(float x) { return x; }
inline float LoadElement(uint16_t h) { return FromBf16(h); }

template <typename Row>
void ScreenPortable(const float* query, const Row* rows, size_t count,
                    size_t d, float* out) {
  for (size_t i = 0; i < count; ++i) {
    const Row* row = rows + i * d;
    float lane[8] = {};
    size_t j = 0;
    for (; j + 8 <= d; j += 8) {
      for (size_t l = 0; l < 8; ++l) {
        const float t = query[j + l] - LoadElement(row[j + l]);
        lane[l] += t * t;
      }
    }
    float total = ((lane[0] + lane[1]) + (lane[2] + lane[3])) +
                  ((lane[4] + lane[5]) + (lane[6] + lane[7]));
    for (; j < d; ++j) {
      const float t = query[j] - LoadElement(row[j]);
      total += t * t;
    }
    out[i] = total;
  }
}

__attribute__((target("avx512f"))) inline __m512 Load16(const float* p) {
  return _mm512_loadu_ps(p);
}
__attribute__((target("avx512f"))) inline __m512 Load16(const uint16_t* p) {
  const __m256i h = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  return _mm512_castsi512_ps(_mm512_slli_epi32(_mm512_cvtepu16_epi32(h), 16));
}

template <typename Row>
__attribute__((target("avx512f"))) void ScreenAvx512(const float* query,
                                                     const Row* rows,
                                                     size_t count, size_t d,
                                                     float* out) {
  const size_t body = d - d % 16;
  size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const Row* r0 = rows + i * d;
    const Row* r1 = r0 + d;
    const Row* r2 = r1 + d;
    const Row* r3 = r2 + d;
    __m512 a0 = _mm512_setzero_ps(), a1 = a0, a2 = a0, a3 = a0;
    for (size_t j = 0; j < body; j += 16) {
      const __m512 q = _mm512_loadu_ps(query + j);
      const __m512 t0 = _mm512_sub_ps(q, Load16(r0 + j));
      const __m512 t1 = _mm512_sub_ps(q, Load16(r1 + j));
      const __m512 t2 = _mm512_sub_ps(q, Load16(r2 + j));
      const __m512 t3 = _mm512_sub_ps(q, Load16(r3 + j));
      a0 = _mm512_add_ps(a0, _mm512_mul_ps(t0, t0));
      a1 = _mm512_add_ps(a1, _mm512_mul_ps(t1, t1));
      a2 = _mm512_add_ps(a2, _mm512_mul_ps(t2, t2));
      a3 = _mm512_add_ps(a3, _mm512_mul_ps(t3, t3));
    }
    float s[4] = {_mm512_reduce_add_ps(a0), _mm512_reduce_add_ps(a1),
                  _mm512_reduce_add_ps(a2), _mm512_reduce_add_ps(a3)};
    for (size_t j = body; j < d; ++j) {
      const Row* r[4] = {r0, r1, r2, r3};
      for (int k = 0; k < 4; ++k) {
        const float t = query[j] - LoadElement(r[k][j]);
        s[k] += t * t;
      }
    }
    for (int k = 0; k < 4; ++k) out[i + k] = s[k];
  }
  if (i < count) ScreenPortable(query, rows + i * d, count - i, d, out + i);
}

__attribute__((target("avx2"))) inline __m256 Load8(const float* p) {
  return _mm256_loadu_ps(p);
}
__attribute__((target("avx2"))) inline __m256 Load8(const uint16_t* p) {
  const __m128i h = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
  return _mm256_castsi256_ps(_mm256_slli_epi32(_mm256_cvtepu16_epi32(h), 16));
}

__attribute__((target("avx2"))) inline float Reduce8(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 1));
  return _mm_cvtss_f32(s);
}

template <typename Row>
__attribute__((target("avx2"))) void ScreenAvx2(const float* query,
                                                const Row* rows, size_t count,
                                                size_t d, float* out) {
  const size_t body = d - d % 8;
  size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const Row* r0 = rows + i * d;
    const Row* r1 = r0 + d;
    const Row* r2 = r1 + d;
    const Row* r3 = r2 + d;
    __m256 a0 = _mm256_setzero_ps(), a1 = a0, a2 = a0, a3 = a0;
    for (size_t j = 0; j < body; j += 8) {
      const __m256 q = _mm256_loadu_ps(query + j);
      const __m256 t0 = _mm256_sub_ps(q, Load8(r0 + j));
      const __m256 t1 = _mm256_sub_ps(q, Load8(r1 + j));
      const __m256 t2 = _mm256_sub_ps(q, Load8(r2 + j));
      const __m256 t3 = _mm256_sub_ps(q, Load8(r3 + j));
      a0 = _mm256_add_ps(a0, _mm256_mul_ps(t0, t0));
      a1 = _mm256_add_ps(a1, _mm256_mul_ps(t1, t1));
      a2 = _mm256_add_ps(a2, _mm256_mul_ps(t2, t2));
      a3 = _mm256_add_ps(a3, _mm256_mul_ps(t3, t3));
    }
    float s[4] = {Reduce8(a0), Reduce8(a1), Reduce8(a2), Reduce8(a3)};
    for (size_t j = body; j < d; ++j) {
      const Row* r[4] = {r0, r1, r2, r3};
      for (int k = 0; k < 4; ++k) {
        const float t = query[j] - LoadElement(r[k][j]);
        s[k] += t * t;
      }
    }
    for (int k = 0; k < 4; ++k) out[i + k] = s[k];
  }
  if (i < count) ScreenPortable(query, rows + i * d, count - i, d, out + i);
}

enum class Isa { kPortable, kAvx2, kAvx512 };

Isa DetectIsa() {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) return Isa::kAvx512;
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
  return Isa::kPortable;
}

const Isa kIsa = DetectIsa();

template <typename Row>
void Dispatch(const float* query, const Row* rows, size_t count, size_t d,
              float* out) {
  switch (kIsa) {
    case Isa::kAvx512:
      ScreenAvx512(query, rows, count, d, out);
      return;
    case Isa::kAvx2:
      ScreenAvx2(query, rows, count, d, out);
      return;
    case Isa::kPortable:
      ScreenPortable(query, rows, count, d, out);
      return;
  }
}

}  // namespace

void ScreenDistances(const float* query, const float* rows, size_t count,
                     size_t d, float* out) {
  Dispatch(query, rows, count, d, out);
}

void ScreenDistancesBf16(const float* query, const uint16_t* rows,
                         size_t count, size_t d, float* out) {
  Dispatch(query, rows, count, d, out);
}

}  // namespace biasforge::internal
