#include "madrom/problems/grf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace madrom::problems {

const char* family_name(Family f) {
  switch (f) {
    case Family::kOde: return "ode";
    case Family::kBurgers: return "burgers";
    case Family::kLaplace: return "laplace";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "ode") return Family::kOde;
  if (name == "burgers") return Family::kBurgers;
  if (name == "laplace") return Family::kLaplace;
  throw std::invalid_argument("unknown problem family '" + name + "'");
}

void GrfSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("grf: scale must be > 0");
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw std::invalid_argument("grf: shift must be >= 0");
  if (!(exponent > 0.0)) throw std::invalid_argument("grf: exponent must be > 0");
  if (max_mode < 0) throw std::invalid_argument("grf: max_mode must be >= 0");
  if (domain == GrfDomain::kPeriodicInterval && !(period > 0.0)) {
    throw std::invalid_argument("grf: period must be > 0");
  }
  if (shift == 0.0) throw std::invalid_argument("grf: shift must be > 0 so mode 0 has finite variance");
}

double GrfSpec::mode_std(int k) const {
  const double freq = domain == GrfDomain::kPeriodicInterval
                          ? 2.0 * std::numbers::pi * k / period
                          : static_cast<double>(k);
  return std::sqrt(scale) * std::pow(freq * freq + shift, -exponent / 2.0);
}

double FourierSeries::operator()(double s) const {
  const double w = 2.0 * std::numbers::pi / period;
  double out = a0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double phase = w * static_cast<double>(k + 1) * s;
    out += a[k] * std::cos(phase) + b[k] * std::sin(phase);
  }
  return out;
}

Eigen::ArrayXd FourierSeries::evaluate(const Eigen::ArrayXd& s) const {
  Eigen::ArrayXd out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = (*this)(s[i]);
  return out;
}

FourierSeries grf_sample(const GrfSpec& spec, Rng& rng) {
  spec.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  FourierSeries f;
  f.period = spec.domain == GrfDomain::kPeriodicInterval ? spec.period : 2.0 * std::numbers::pi;
  f.a0 = spec.mode_std(0) * normal(rng);
  for (int k = 1; k <= spec.max_mode; ++k) {
    const double sd = spec.mode_std(k);
    f.a.push_back(sd * normal(rng));
    f.b.push_back(sd * normal(rng));
  }
  return f;
}

GrfSpec burgers_grf() {
  return GrfSpec{100.0, 9.0, 3.0, 64, GrfDomain::kPeriodicInterval, 1.0};
}

GrfSpec burgers_extrapolation_grf() {
  return GrfSpec{100.0, 25.0, 2.5, 64, GrfDomain::kPeriodicInterval, 1.0};
}

GrfSpec laplace_circle_grf() {
  return GrfSpec{std::pow(10.0, 1.5), 100.0, 3.0, 32, GrfDomain::kUnitCircle, 1.0};
}

}  // namespace madrom::problems
