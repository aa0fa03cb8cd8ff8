#include "batchkb/gp.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <string>

#include "batchkb/errors.hpp"
#include "batchkb/simd.hpp"

namespace batchkb {

namespace {
constexpr double kVarianceSlack = -1e-10;
constexpr std::size_t kGramCacheLimit = 3000;  // 8*n^2 <= 72 MB
}  // namespace

// ------------------------------ PosteriorState ------------------------------

PosteriorState::PosteriorState(const KernelSpec& kernel, int dim, double lambda)
    : kernel_(kernel), dim_(dim), lambda_(lambda) {
  kernel_.validate();
  if (dim < 1) throw ConfigError("posterior: dimension must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("posterior: lambda must be > 0");
}

std::span<const double> PosteriorState::point(std::size_t i) const {
  return {pts_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}

void PosteriorState::kernel_vector(std::span<const double> x, double* out) const {
  for (std::size_t i = 0; i < count_; ++i)
    out[i] = kernel_from_distance(kernel_, std::sqrt(squared_distance(point(i), x)));
}

void PosteriorState::forward_solve(double* v) const {
  const double* L = chol_.data();
  for (std::size_t i = 0; i < count_; ++i) {
    const double* row = L + i * (i + 1) / 2;
    double s = v[i];
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * v[j];
    v[i] = s / row[i];
  }
}

void PosteriorState::add_point(std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw InputError("add_point: point has wrong dimension");
  std::vector<double> v(count_);
  kernel_vector(x, v.data());
  forward_solve(v.data());
  double diag2 = 1.0 + lambda_;
  for (double c : v) diag2 -= c * c;
  if (!(diag2 > 0.0))
    throw NumericalError("factor extension failed: pivot^2 = " + std::to_string(diag2));
  chol_.insert(chol_.end(), v.begin(), v.end());
  chol_.push_back(std::sqrt(diag2));
  pts_.insert(pts_.end(), x.begin(), x.end());
  ++count_;
  y_.clear();
  alpha_.clear();
}

double PosteriorState::posterior_variance(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw InputError("posterior_variance: point has wrong dimension");
  std::vector<double> v(count_);
  kernel_vector(x, v.data());
  forward_solve(v.data());
  double var = 1.0;
  for (double c : v) var -= c * c;
  if (var < kVarianceSlack)
    throw NumericalError("posterior variance " + std::to_string(var) +
                         " below round-off budget; factorization is broken");
  return var < 0.0 ? 0.0 : var;
}

double PosteriorState::posterior_mean(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw InputError("posterior_mean: point has wrong dimension");
  if (count_ == 0) return 0.0;
  if (y_.empty())
    throw std::logic_error("posterior_mean: observations not set for this batch");
  std::vector<double> v(count_);
  kernel_vector(x, v.data());
  forward_solve(v.data());
  return simd::active_ops().dot(v.data(), alpha_.data(), count_);
}

void PosteriorState::set_observations(std::span<const double> y) {
  if (y.size() != count_)
    throw InputError("set_observations: expected " + std::to_string(count_) +
                     " values, got " + std::to_string(y.size()));
  y_.assign(y.begin(), y.end());
  alpha_ = y_;
  forward_solve(alpha_.data());
}

// ---------------------------- empirical_info_gain ---------------------------

double empirical_info_gain(const KernelSpec& kernel, int dim, double sigma_sq,
                           std::span<const double> points) {
  if (!(sigma_sq > 0.0)) throw ConfigError("info gain: sigma^2 must be > 0");
  if (points.empty()) throw InputError("info gain: need a nonempty point set");
  Eigen::MatrixXd M = gram_matrix(kernel, dim, points) / sigma_sq;
  M.diagonal().array() += 1.0;
  // Packed in-place Cholesky; log det = 2 * sum(log(diag)).
  const Eigen::Index n = M.rows();
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = M(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= M(j, k) * M(j, k);
    if (!(d > 0.0))
      throw NumericalError("info gain factorization failed at pivot " + std::to_string(j));
    const double piv = std::sqrt(d);
    logdet += 2.0 * std::log(piv);
    M(j, j) = piv;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = M(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= M(i, k) * M(j, k);
      M(i, j) = s / piv;
    }
  }
  return 0.5 * logdet;
}

// ------------------------------- KernelOracle -------------------------------

KernelOracle::KernelOracle(const KernelSpec& spec, int dim,
                           std::span<const double> points, Cache cache)
    : spec_(spec), dim_(dim), pts_(points.begin(), points.end()) {
  spec_.validate();
  if (dim < 1 || points.empty() || points.size() % static_cast<std::size_t>(dim) != 0)
    throw InputError("kernel oracle: bad point list");
  n_ = points.size() / dim;
  const bool want = cache == Cache::kOn || (cache == Cache::kAuto && n_ <= kGramCacheLimit);
  if (want) gram_ = gram_matrix(spec_, dim_, pts_);
}

std::span<const double> KernelOracle::point(int i) const {
  return {pts_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
}

void KernelOracle::row(int q, std::span<const int> columns, std::span<double> out) const {
  assert(out.size() >= columns.size());
  if (cached()) {
    const double* col = gram_.col(q).data();  // symmetric, column-major
    for (std::size_t i = 0; i < columns.size(); ++i) out[i] = col[columns[i]];
    return;
  }
  const std::span<const double> xq = point(q);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out[i] = kernel_from_distance(spec_, std::sqrt(squared_distance(point(columns[i]), xq)));
}

// ------------------------------ BatchPosterior ------------------------------

BatchPosterior::BatchPosterior(const KernelOracle& oracle,
                               std::vector<int> candidates, double lambda,
                               std::size_t capacity)
    : oracle_(&oracle), lambda_(lambda), cand_(std::move(candidates)),
      capacity_(capacity) {
  if (!(lambda > 0.0)) throw ConfigError("batch posterior: lambda must be > 0");
  if (cand_.empty()) throw std::logic_error("batch posterior: empty candidate set");
  const std::size_t n = cand_.size();
  V_.assign(n * capacity_, 0.0);
  var_.assign(n, 1.0);  // normalized prior variance
  Lrows_.reserve(capacity_ * (capacity_ + 1) / 2);
  selected_.reserve(capacity_);
  wbuf_.resize(n);
  kbuf_.resize(n);
  vqbuf_.resize(capacity_);
}

double BatchPosterior::variance(std::size_t cand_pos) const {
  const double v = var_[cand_pos];
  if (v < kVarianceSlack)
    throw NumericalError("candidate variance " + std::to_string(v) +
                         " below round-off budget");
  return v < 0.0 ? 0.0 : v;
}

std::size_t BatchPosterior::argmax_variance() const {
  return simd::active_ops().argmax(var_.data(), var_.size());
}

std::size_t BatchPosterior::argmax_variance(std::span<const char> allowed) const {
  std::size_t best = var_.size();
  for (std::size_t i = 0; i < var_.size(); ++i)
    if (allowed[i] && (best == var_.size() || var_[i] > var_[best])) best = i;
  if (best == var_.size())
    throw std::logic_error("batch posterior: no allowed candidate to sample");
  return best;
}

void BatchPosterior::add(std::size_t cand_pos) {
  if (m_ >= capacity_) throw std::logic_error("batch posterior: capacity exhausted");
  const auto& ops = simd::active_ops();
  const std::size_t n = cand_.size();
  const int q = cand_[cand_pos];
  const double* vq_in = V_.data() + cand_pos * capacity_;
  std::memcpy(vqbuf_.data(), vq_in, m_ * sizeof(double));

  last_var_ = variance(cand_pos);
  sum_var_ += last_var_;
  const double diag2 = var_[cand_pos] + lambda_;
  if (!(diag2 > 0.0))
    throw NumericalError("factor extension failed: pivot^2 = " + std::to_string(diag2));
  const double diag = std::sqrt(diag2);

  ops.mat_vec_rows(V_.data(), n, m_, capacity_, vqbuf_.data(), wbuf_.data());
  oracle_->row(q, cand_, kbuf_);
  ops.append_column(kbuf_.data(), wbuf_.data(), 1.0 / diag, V_.data() + m_,
                    capacity_, var_.data(), n);

  Lrows_.insert(Lrows_.end(), vqbuf_.begin(), vqbuf_.begin() + m_);
  Lrows_.push_back(diag);
  selected_.push_back(q);
  ++m_;
}

std::vector<double> BatchPosterior::posterior_mean(std::span<const double> y) const {
  if (y.size() != m_)
    throw InputError("posterior_mean: expected " + std::to_string(m_) +
                     " observations, got " + std::to_string(y.size()));
  std::vector<double> u(y.begin(), y.end());
  const double* L = Lrows_.data();
  for (std::size_t i = 0; i < m_; ++i) {
    const double* row = L + i * (i + 1) / 2;
    double s = u[i];
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * u[j];
    u[i] = s / row[i];
  }
  std::vector<double> mu(cand_.size());
  simd::active_ops().mat_vec_rows(V_.data(), cand_.size(), m_, capacity_,
                                  u.data(), mu.data());
  return mu;
}

}  // namespace batchkb
