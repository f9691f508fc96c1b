#include "dgmo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgmo/errors.hpp"

namespace dgmo {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_pair(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) {
    throw ContractError("metric inputs differ in length: " + std::to_string(est.size()) + " vs " +
                        std::to_string(ref.size()));
  }
}

// 10 log10(num / den), capped; den == 0 means a perfect reconstruction,
// num == 0 a silent estimate (which wins if both vanish).
double capped_ratio_db(double num, double den) {
  if (num <= 0.0) return -kMetricCapDb;
  if (den <= 0.0) return kMetricCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

}  // namespace

double si_sdr(std::span<const double> est, std::span<const double> ref) {
  check_pair(est, ref);
  const double ref_energy = dot(ref, ref);
  if (ref_energy == 0.0) throw DomainError("si_sdr: reference is all zeros");
  const double alpha = dot(est, ref) / ref_energy;
  double target = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * ref[i];
    const double e = t - est[i];
    target += t * t;
    error += e * e;
  }
  return capped_ratio_db(target, error);
}

double sdr(std::span<const double> est, std::span<const double> ref) {
  check_pair(est, ref);
  const double ref_energy = dot(ref, ref);
  if (ref_energy == 0.0) throw DomainError("sdr: reference is all zeros");
  double error = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double e = ref[i] - est[i];
    error += e * e;
  }
  return capped_ratio_db(ref_energy, error);
}

double sdri(std::span<const double> est, std::span<const double> ref, std::span<const double> mix) {
  check_pair(mix, ref);
  return sdr(est, ref) - sdr(mix, ref);
}

std::vector<double> align_length(std::span<const double> x, std::size_t length) {
  std::vector<double> out(length, 0.0);
  std::copy_n(x.begin(), std::min(length, x.size()), out.begin());
  return out;
}

double si_sdr(const Waveform& est, const Waveform& ref) {
  return si_sdr(align_length(est.samples, ref.size()), ref.samples);
}

double sdr(const Waveform& est, const Waveform& ref) {
  return sdr(align_length(est.samples, ref.size()), ref.samples);
}

double sdri(const Waveform& est, const Waveform& ref, const Waveform& mix) {
  return sdri(align_length(est.samples, ref.size()), ref.samples, align_length(mix.samples, ref.size()));
}

EvalResult evaluate(const Waveform& est, const Waveform& ref, const Waveform& mix) {
  const auto e = align_length(est.samples, ref.size());
  const auto m = align_length(mix.samples, ref.size());
  EvalResult r;
  r.si_sdr = si_sdr(e, ref.samples);
  r.sdr = sdr(e, ref.samples);
  r.sdr_mixture = sdr(m, ref.samples);
  r.sdri = r.sdr - r.sdr_mixture;
  return r;
}

}  // namespace dgmo
