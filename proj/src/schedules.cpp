#include "batchkb/schedules.hpp"

#include <cmath>

#include "batchkb/errors.hpp"

namespace batchkb {

namespace {

double log_of(std::int64_t T, LogBase base) {
  return base == LogBase::kNatural ? std::log(static_cast<double>(T))
                                   : std::log2(static_cast<double>(T));
}

std::int64_t ceil_ll(double x) { return static_cast<std::int64_t>(std::ceil(x)); }

}  // namespace

double KernelClassSpec::eta() const {
  return family == KernelFamily::kSquaredExponential ? 0.5 : nu / (2.0 * nu + d);
}

void KernelClassSpec::validate() const {
  if (d < 1) throw ConfigError("kernel class: dimension must be >= 1");
  if (family == KernelFamily::kMatern && nu != 0.5 && nu != 1.5 && nu != 2.5)
    throw ConfigError("kernel class: Matern nu must be one of {0.5, 1.5, 2.5}");
}

BatchSchedule BatchSchedule::from_sizes(std::int64_t T, ScheduleRule rule,
                                        std::vector<std::int64_t> sizes) {
  BatchSchedule s;
  s.T = T;
  s.rule = rule;
  s.sizes = std::move(sizes);
  std::int64_t acc = 0;
  for (std::int64_t n : s.sizes) {
    if (n <= 0) throw ConfigError("schedule: every batch size must be positive");
    acc += n;
    s.endpoints.push_back(acc);
  }
  if (acc != T) throw ConfigError("schedule: sizes must sum to T");
  return s;
}

BatchSchedule growing_schedule_li(std::int64_t T) {
  if (T < 2) throw ConfigError("growing_schedule_li: requires T >= 2");
  std::vector<std::int64_t> sizes;
  std::int64_t acc = 0, prev = 1;
  while (acc < T) {
    const std::int64_t cand = ceil_ll(std::sqrt(static_cast<double>(T) * static_cast<double>(prev)));
    const std::int64_t n = std::min(cand, T - acc);
    sizes.push_back(n);
    acc += n;
    prev = n;
  }
  return BatchSchedule::from_sizes(T, ScheduleRule::kGrowingLi, std::move(sizes));
}

BatchSchedule growing_schedule_param(std::int64_t T, double a) {
  if (T < 2) throw ConfigError("growing_schedule_param: requires T >= 2");
  if (!(a > 0.0 && a < 1.0))
    throw ConfigError("growing_schedule_param: a must lie in (0, 1)");
  std::vector<std::int64_t> sizes;
  std::int64_t acc = 0;
  double apow = 1.0;
  while (acc < T) {
    apow *= a;
    const std::int64_t cand = ceil_ll(std::pow(static_cast<double>(T), 1.0 - apow));
    const std::int64_t n = std::min(cand, T - acc);
    if (n <= 0)  // ceil(T^(1-a)) >= 1 for T >= 2, so this cannot trigger
      throw NumericalError("growing_schedule_param: non-positive batch size");
    sizes.push_back(n);
    acc += n;
  }
  return BatchSchedule::from_sizes(T, ScheduleRule::kGrowingParam, std::move(sizes));
}

int param_batches_upper_bound(std::int64_t T, double a) {
  const double v = std::log(std::log2(static_cast<double>(T))) / std::log(1.0 / a);
  return static_cast<int>(std::ceil(v)) + 1;
}

int param_batches_lower_bound(std::int64_t T, double a) {
  const double lt = std::log(static_cast<double>(T));
  const double v = std::log(lt / std::log(lt)) / std::log(1.0 / a);
  return static_cast<int>(std::floor(v));
}

std::variant<BatchSchedule, OverflowReport> fixed_schedule_li(
    std::int64_t T, int B, const KernelClassSpec& kc, LogBase base) {
  if (T < 2 || B < 2) throw ConfigError("fixed_schedule_li: requires T >= B >= 2");
  kc.validate();
  const double eta = kc.eta();
  const double etaB = std::pow(eta, B);
  const double logT = log_of(T, base);
  std::vector<std::int64_t> sizes;
  std::int64_t acc = 0;
  for (int i = 1; i < B; ++i) {
    const double etai = std::pow(eta, i);
    const double texp = (1.0 - etai) / (1.0 - etaB);
    double v = std::pow(static_cast<double>(T), texp);
    if (kc.family == KernelFamily::kSquaredExponential)
      v *= std::pow(logT, kc.d * (etai - etaB) / (1.0 - etaB));
    sizes.push_back(ceil_ll(v));
    acc += sizes.back();
  }
  const std::int64_t last = T - acc;
  if (last <= 0) {
    OverflowReport r;
    r.T = T;
    r.B = B;
    r.leading_sizes = std::move(sizes);
    r.deficit = -last;
    return r;
  }
  sizes.push_back(last);
  return BatchSchedule::from_sizes(T, ScheduleRule::kFixedLi, std::move(sizes));
}

BatchSchedule fixed_schedule_refined(std::int64_t T, int B, const KernelClassSpec& kc,
                                     LogBase base) {
  if (T < 2 || B < 2) throw ConfigError("fixed_schedule_refined: requires T >= B >= 2");
  kc.validate();
  const double eta = kc.eta();
  const double etaB = std::pow(eta, B);
  const double logT = log_of(T, base);
  std::vector<std::int64_t> ends(B);
  for (int i = 1; i <= B; ++i) {
    const double etai = std::pow(eta, i);
    const double texp = (1.0 - etai) / (1.0 - etaB);
    const double lexp = kc.family == KernelFamily::kSquaredExponential
                            ? (kc.d + 1) * (etai - etaB) / (1.0 - etaB)
                            : (etai - etaB) / (1.0 - etaB);
    ends[i - 1] = ceil_ll(std::pow(static_cast<double>(T), texp) * std::pow(logT, lexp));
  }
  ends[B - 1] = T;
  std::vector<std::int64_t> sizes(B);
  std::int64_t prev = 0;
  for (int i = 0; i < B; ++i) {
    sizes[i] = ends[i] - prev;
    if (sizes[i] <= 0)
      throw ConfigError("fixed_schedule_refined: endpoints not strictly increasing at T=" +
                        std::to_string(T) + ", B=" + std::to_string(B) +
                        "; use a smaller B");
    prev = ends[i];
  }
  return BatchSchedule::from_sizes(T, ScheduleRule::kFixedRefined, std::move(sizes));
}

ReferenceEndpoints reference_endpoints(std::int64_t T, int B, const KernelClassSpec& kc) {
  if (T < 1 || B < 1) throw ConfigError("reference_endpoints: requires T >= 1, B >= 1");
  kc.validate();
  const double eta = kc.eta();
  const double etaB = std::pow(eta, B);
  const double logT = std::log(static_cast<double>(T));
  ReferenceEndpoints refs;
  refs.T = T;
  refs.kernel_class = kc;
  refs.times.resize(B);
  for (int i = 1; i <= B; ++i) {
    const double etai = std::pow(eta, i);
    const double texp = (1.0 - etai) / (1.0 - etaB);
    double v = std::pow(static_cast<double>(T), texp);
    if (kc.family == KernelFamily::kSquaredExponential)
      v *= std::pow(logT, kc.d * eta * (etai - etaB) / (1.0 - etaB));
    refs.times[i - 1] = ceil_ll(v);
  }
  refs.times[B - 1] = T;
  for (int i = 1; i < B; ++i)
    if (refs.times[i] <= refs.times[i - 1])
      throw ConfigError("reference_endpoints: times not strictly increasing; T too small for B");
  return refs;
}

std::vector<int> classify_bad_batch(std::span<const std::int64_t> realized,
                                    const ReferenceEndpoints& refs) {
  const std::size_t B = realized.size();
  if (B == 0 || B != refs.times.size())
    throw InputError("classify_bad_batch: endpoint list must match the reference length");
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < B; ++i) {
    if (realized[i] <= prev)
      throw InputError("classify_bad_batch: endpoints must be strictly increasing");
    prev = realized[i];
  }
  if (realized[B - 1] != refs.T)
    throw InputError("classify_bad_batch: last endpoint must equal T");
  std::vector<int> bad;
  if (realized[0] >= refs.times[0]) bad.push_back(1);
  for (std::size_t i = 2; i <= B; ++i)
    if (realized[i - 2] < refs.times[i - 2] && realized[i - 1] >= refs.times[i - 1])
      bad.push_back(static_cast<int>(i));
  if (bad.empty())
    throw std::logic_error("classify_bad_batch: partition property violated");
  return bad;
}

std::string rule_name(ScheduleRule rule) {
  switch (rule) {
    case ScheduleRule::kGrowingLi: return "growing_li";
    case ScheduleRule::kGrowingParam: return "growing_param";
    case ScheduleRule::kFixedLi: return "fixed_li";
    case ScheduleRule::kFixedRefined: return "fixed_refined";
  }
  return "unknown";
}

}  // namespace batchkb
