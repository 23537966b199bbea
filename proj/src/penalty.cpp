#include "aoii/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace aoii {

PenaltyFunction PenaltyFunction::linear(double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("PenaltyFunction::linear: alpha and beta must be nonnegative");
  return PenaltyFunction(PenaltyKind::linear, alpha, beta);
}

PenaltyFunction PenaltyFunction::quadratic(double kappa) {
  if (!(kappa >= 0.0))
    throw std::invalid_argument("PenaltyFunction::quadratic: kappa must be nonnegative");
  return PenaltyFunction(PenaltyKind::quadratic, kappa, 0.0);
}

PenaltyFunction PenaltyFunction::logarithmic(double base) {
  if (!(base > 1.0))
    throw std::invalid_argument("PenaltyFunction::logarithmic: base must exceed 1");
  return PenaltyFunction(PenaltyKind::logarithmic, base, 0.0);
}

PenaltyFunction PenaltyFunction::table(std::vector<double> values, std::optional<double> slope) {
  if (values.empty())
    throw std::invalid_argument("PenaltyFunction::table: values must be nonempty");
  double prev = -1.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("PenaltyFunction::table: entries must be finite and nonnegative");
    if (v < prev)
      throw std::invalid_argument("PenaltyFunction::table: entries must be nondecreasing");
    prev = v;
  }
  if (slope && !(*slope >= 0.0))
    throw std::invalid_argument("PenaltyFunction::table: extrapolation slope must be nonnegative");
  PenaltyFunction f(PenaltyKind::table, 0.0, 0.0);
  f.values_ = std::move(values);
  f.slope_ = slope;
  return f;
}

double PenaltyFunction::operator()(std::int64_t delta) const {
  if (delta < 0) throw std::domain_error("PenaltyFunction: delta must be nonnegative");
  double d = static_cast<double>(delta);
  switch (kind_) {
    case PenaltyKind::linear:
      return a_ * d + b_;
    case PenaltyKind::quadratic:
      return a_ * d * d;
    case PenaltyKind::logarithmic:
      return std::log(d + 1.0) / std::log(a_);
    case PenaltyKind::table: {
      auto n = static_cast<std::int64_t>(values_.size());
      if (delta < n) return values_[static_cast<std::size_t>(delta)];
      // Missing slope extends the last entry as a constant (degenerate).
      double s = slope_.value_or(0.0);
      return values_.back() + s * static_cast<double>(delta - (n - 1));
    }
  }
  return 0.0;
}

TailGrowth PenaltyFunction::tail_growth() const {
  switch (kind_) {
    case PenaltyKind::linear:
      return a_ == 0.0 ? TailGrowth::constant : TailGrowth::linear;
    case PenaltyKind::quadratic:
      return a_ == 0.0 ? TailGrowth::constant : TailGrowth::quadratic;
    case PenaltyKind::logarithmic:
      return TailGrowth::logarithmic;
    case PenaltyKind::table:
      return (!slope_ || *slope_ == 0.0) ? TailGrowth::constant : TailGrowth::linear;
  }
  return TailGrowth::constant;
}

bool PenaltyFunction::degenerate_constant() const { return tail_growth() == TailGrowth::constant; }

}  // namespace aoii
