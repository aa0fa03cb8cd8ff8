#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel primitives behind the posterior-variance scan, which is the
// hot loop of every run: one mat-vec over all candidates per sampled point.
// A scalar reference backend defines the semantics; vector backends (AVX2 on
// x86-64, NEON on aarch64) are selected at runtime and equivalence-tested
// against the reference.

namespace batchkb::simd {

struct Ops {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // out[r] = dot(A + r*stride, x, cols) for r in [0, rows).
  void (*mat_vec_rows)(const double* A, std::size_t rows, std::size_t cols,
                       std::size_t stride, const double* x, double* out);

  // Fused factor-column append and variance downdate. For r in [0, n):
  //   t = (kcol[r] - w[r]) * inv_diag;  col[r*stride] = t;  var[r] -= t*t.
  void (*append_column)(const double* kcol, const double* w, double inv_diag,
                        double* col, std::size_t stride, double* var,
                        std::size_t n);

  // Index of the maximum element, lowest index on ties. Requires n >= 1 and
  // finite inputs.
  std::size_t (*argmax)(const double* v, std::size_t n);
};

const Ops& scalar_ops();

// The runtime-selected backend. Honors BATCHKB_SIMD=<name> when set (throws
// ConfigError if that backend cannot run on this machine).
const Ops& active_ops();

// Backends usable on this machine, scalar first.
std::vector<const Ops*> usable_ops();

}  // namespace batchkb::simd
