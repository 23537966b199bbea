#include "aoii/delay.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace aoii {

namespace {

constexpr double kSumTolerance = 1e-12;

// Hazards from reverse tail sums: q_t = w_t / sum_{i>=t} w_i.  Normalization
// of the weights cancels, and the last hazard comes out as exactly 1.
std::vector<double> hazards_from_weights(const std::vector<double>& w) {
  std::vector<double> q(w.size());
  double tail = 0.0;
  for (std::size_t k = w.size(); k-- > 0;) {
    tail += w[k];
    q[k] = tail > 0.0 ? w[k] / tail : 0.0;
  }
  return q;
}

}  // namespace

std::string DelayValidation::message() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

DelayModel DelayModel::geometric(double success_prob) {
  if (!(success_prob > 0.0 && success_prob < 1.0))
    throw std::invalid_argument("DelayModel::geometric: success probability must lie in (0, 1), got " +
                                std::to_string(success_prob));
  DelayModel d;
  d.kind_ = DelayKind::geometric;
  d.success_prob_ = success_prob;
  return d;
}

DelayModel DelayModel::zipf(double exponent, int t_max) {
  if (t_max <= 1) throw std::invalid_argument("DelayModel::zipf: t_max must exceed 1");
  if (!(exponent >= 0.0) || !std::isfinite(exponent))
    throw std::invalid_argument("DelayModel::zipf: exponent must be a finite nonnegative real");
  std::vector<double> w(static_cast<std::size_t>(t_max));
  for (int t = 1; t <= t_max; ++t)
    w[static_cast<std::size_t>(t - 1)] = std::pow(static_cast<double>(t), -exponent);
  double total = std::accumulate(w.begin(), w.end(), 0.0);

  DelayModel d;
  d.kind_ = DelayKind::zipf;
  d.zipf_exponent_ = exponent;
  d.hazard_ = hazards_from_weights(w);
  d.pmf_ = std::move(w);
  for (auto& x : d.pmf_) x /= total;
  return d;
}

DelayModel DelayModel::explicit_pmf(std::vector<double> pmf) {
  DelayValidation report = validate_pmf(pmf);
  if (!report.ok)
    throw std::invalid_argument("DelayModel::explicit_pmf: " + report.message());
  while (!pmf.empty() && pmf.back() == 0.0) pmf.pop_back();

  DelayModel d;
  d.kind_ = DelayKind::explicit_pmf;
  d.hazard_ = hazards_from_weights(pmf);
  d.pmf_ = std::move(pmf);
  return d;
}

DelayModel DelayModel::deterministic(int slots) {
  if (slots < 1) throw std::invalid_argument("DelayModel::deterministic: slots must be positive");
  std::vector<double> pmf(static_cast<std::size_t>(slots), 0.0);
  pmf.back() = 1.0;
  return explicit_pmf(std::move(pmf));
}

std::optional<int> DelayModel::t_max() const {
  if (!bounded()) return std::nullopt;
  return static_cast<int>(pmf_.size());
}

double DelayModel::hazard(int t) const {
  if (t < 1) throw std::domain_error("DelayModel::hazard: t must be >= 1");
  if (kind_ == DelayKind::geometric) return success_prob_;
  if (t > static_cast<int>(hazard_.size())) return 0.0;
  return hazard_[static_cast<std::size_t>(t - 1)];
}

double DelayModel::pmf(int t) const {
  if (t < 1) throw std::domain_error("DelayModel::pmf: t must be >= 1");
  if (kind_ == DelayKind::geometric)
    return success_prob_ * std::pow(1.0 - success_prob_, t - 1);
  if (t > static_cast<int>(pmf_.size())) return 0.0;
  return pmf_[static_cast<std::size_t>(t - 1)];
}

double DelayModel::success_prob() const {
  if (kind_ != DelayKind::geometric)
    throw std::logic_error("DelayModel::success_prob: not a geometric model");
  return success_prob_;
}

double DelayModel::zipf_exponent() const {
  if (kind_ != DelayKind::zipf)
    throw std::logic_error("DelayModel::zipf_exponent: not a zipf model");
  return zipf_exponent_;
}

std::string DelayModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case DelayKind::geometric:
      os << "geometric(ps=" << success_prob_ << ")";
      break;
    case DelayKind::zipf:
      os << "zipf(a=" << zipf_exponent_ << ",tmax=" << pmf_.size() << ")";
      break;
    case DelayKind::explicit_pmf:
      os << "explicit(tmax=" << pmf_.size() << ")";
      break;
  }
  return os.str();
}

DelayValidation validate_pmf(std::span<const double> pmf) {
  DelayValidation report;
  report.bounded = true;
  if (pmf.empty()) {
    report.ok = false;
    report.violations.push_back("PMF is empty");
    return report;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (!(pmf[k] >= 0.0) || !std::isfinite(pmf[k])) {
      report.ok = false;
      report.violations.push_back("entry " + std::to_string(k + 1) + " is negative or non-finite");
    }
    sum += pmf[k];
  }
  report.pmf_sum = sum;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    report.ok = false;
    std::ostringstream os;
    os << "PMF sums to " << sum;
    report.violations.push_back(os.str());
  }
  if (report.ok && sum > 0.0 && pmf.back() == 0.0) {
    // Trailing zero mass is stripped by the factory; flag only an all-zero tail
    // that would leave nothing behind.
    bool any = false;
    for (double x : pmf)
      if (x > 0.0) any = true;
    if (!any) {
      report.ok = false;
      report.violations.push_back("PMF carries no mass");
    }
  }
  return report;
}

DelayValidation validate(const DelayModel& delay) {
  DelayValidation report;
  report.bounded = delay.bounded();
  if (delay.bounded()) {
    int t_max = *delay.t_max();
    double sum = 0.0;
    for (int t = 1; t <= t_max; ++t) {
      double q = delay.hazard(t);
      sum += delay.pmf(t);
      if (q < 0.0 || q > 1.0) {
        report.ok = false;
        report.violations.push_back("hazard q_" + std::to_string(t) + " outside [0, 1]");
      }
    }
    report.pmf_sum = sum;
    if (std::abs(sum - 1.0) > kSumTolerance) {
      report.ok = false;
      std::ostringstream os;
      os << "PMF sums to " << sum;
      report.violations.push_back(os.str());
    }
    if (delay.hazard(t_max) != 1.0) {
      report.ok = false;
      report.violations.push_back("hazard at t_max is not exactly 1");
    }
  } else {
    report.pmf_sum = 1.0;  // geometric series, analytic
    double q = delay.hazard(1);
    if (!(q > 0.0 && q < 1.0)) {
      report.ok = false;
      report.violations.push_back("geometric success probability outside (0, 1)");
    }
  }
  return report;
}

}  // namespace aoii
