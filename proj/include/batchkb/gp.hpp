#pragma once

#include <span>
#include <vector>

#include "batchkb/kernels.hpp"

namespace batchkb {

// GP posterior over an explicit sample list with zero prior mean and
// regularizer lambda (commonly tied to the noise variance; it stays a
// free parameter here). The factor of (K + lambda*I) is extended one row per
// added point, never recomputed from scratch. Observations stay absent until
// a batch closes; only variances are available before then.
class PosteriorState {
 public:
  PosteriorState(const KernelSpec& kernel, int dim, double lambda);

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  std::size_t size() const { return count_; }
  bool has_observations() const { return !y_.empty() || count_ == 0; }
  std::span<const double> point(std::size_t i) const;

  // Rank-1 row extension of the factor. Throws NumericalError when the new
  // diagonal element is not positive (carries the offending pivot value).
  void add_point(std::span<const double> x);

  // sigma_t(x)^2 in [0, 1]; round-off down to -1e-10 clamps to 0, anything
  // lower throws NumericalError.
  double posterior_variance(std::span<const double> x) const;

  // mu_t(x); zero for the empty state, requires observations otherwise.
  double posterior_mean(std::span<const double> x) const;

  void set_observations(std::span<const double> y);

  // Packed row-major lower factor of (K + lambda*I); row i holds i+1 values.
  std::span<const double> factor() const { return chol_; }

 private:
  void kernel_vector(std::span<const double> x, double* out) const;
  void forward_solve(double* v) const;  // v <- L^-1 v over count_ entries

  KernelSpec kernel_;
  int dim_;
  double lambda_;
  std::size_t count_ = 0;
  std::vector<double> pts_;
  std::vector<double> chol_;
  std::vector<double> y_;
  std::vector<double> alpha_;  // L^-1 y, cached by set_observations
};

// (1/2) log det(I + K/sigma_sq): the mutual information of the point set
// under observation noise sigma_sq. Natural log.
double empirical_info_gain(const KernelSpec& kernel, int dim, double sigma_sq,
                           std::span<const double> points);

// Kernel values against a fixed point set, with the full Gram matrix cached
// when the set is small enough that 8*n^2 bytes are cheaper than re-deriving
// rows every step.
class KernelOracle {
 public:
  enum class Cache { kAuto, kOn, kOff };

  KernelOracle(const KernelSpec& spec, int dim, std::span<const double> points,
               Cache cache = Cache::kAuto);

  int dim() const { return dim_; }
  std::size_t size() const { return n_; }
  const KernelSpec& kernel() const { return spec_; }
  std::span<const double> point(int i) const;
  bool cached() const { return gram_.size() > 0; }

  // out[i] = k(point(q), point(columns[i])).
  void row(int q, std::span<const int> columns, std::span<double> out) const;

 private:
  KernelSpec spec_;
  int dim_;
  std::size_t n_;
  std::vector<double> pts_;
  Eigen::MatrixXd gram_;
};

// Posterior over one batch's samples, vectorized across a fixed candidate
// list: variances for every candidate are maintained through each addition
// (one mat-vec per step), and means become available once the batch's
// observations arrive. Sampling is restricted to the candidates, which is
// exactly what max-variance selection needs.
class BatchPosterior {
 public:
  BatchPosterior(const KernelOracle& oracle, std::vector<int> candidates,
                 double lambda, std::size_t capacity);

  const std::vector<int>& candidates() const { return cand_; }
  std::size_t count() const { return m_; }
  const std::vector<int>& selected() const { return selected_; }

  // Raw sigma^2 per candidate (may carry round-off noise around 0).
  const std::vector<double>& raw_variances() const { return var_; }
  // Clamped variance; throws NumericalError below the -1e-10 budget.
  double variance(std::size_t cand_pos) const;

  // Position of the max-variance candidate, lowest index on ties.
  std::size_t argmax_variance() const;
  // Same, restricted to positions with allowed[pos] != 0.
  std::size_t argmax_variance(std::span<const char> allowed) const;

  // Adds candidates[cand_pos] as the next sample.
  void add(std::size_t cand_pos);

  double last_selected_variance() const { return last_var_; }
  double sum_selected_variance() const { return sum_var_; }

  // Posterior mean at every candidate given this batch's observations, in
  // selection order. Throws InputError on a length mismatch.
  std::vector<double> posterior_mean(std::span<const double> y) const;

 private:
  const KernelOracle* oracle_;
  double lambda_;
  std::vector<int> cand_;
  std::size_t capacity_;
  std::size_t m_ = 0;
  std::vector<double> V_;      // per candidate: row of L^-1 k(S, x), stride capacity_
  std::vector<double> var_;    // per candidate: 1 - ||v||^2
  std::vector<double> Lrows_;  // packed lower factor rows of (K_S + lambda*I)
  std::vector<int> selected_;
  std::vector<double> wbuf_, kbuf_, vqbuf_;
  double sum_var_ = 0.0;
  double last_var_ = 1.0;
};

}  // namespace batchkb
