#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aoii {

enum class DelayKind { geometric, zipf, explicit_pmf };

struct DelayValidation {
  bool ok = true;
  bool bounded = false;
  double pmf_sum = 0.0;
  std::vector<std::string> violations;

  std::string message() const;
};

// Discrete transmission-time distribution.  Exposes the PMF p_t = Pr(T = t)
// and the per-slot delivery hazards q_t = Pr(T = t | T >= t); for bounded
// models q_t is defined as 0 past t_max and equals exactly 1 at t_max.
//
// Hazards of bounded models are precomputed at construction since kernel
// assembly queries them per state.  Geometric is the only unbounded family;
// its hazard is the constant success probability.  A deterministic delay of T
// slots is represented as an explicit PMF with unit mass at T.
class DelayModel {
 public:
  static DelayModel geometric(double success_prob);
  static DelayModel zipf(double exponent, int t_max);
  static DelayModel explicit_pmf(std::vector<double> pmf);
  static DelayModel deterministic(int slots);

  DelayKind kind() const { return kind_; }
  bool bounded() const { return kind_ != DelayKind::geometric; }
  std::optional<int> t_max() const;

  // q_t for t >= 1; t = 0 is a domain error.
  double hazard(int t) const;
  // p_t for t >= 1; zero past t_max for bounded models.
  double pmf(int t) const;

  double success_prob() const;   // geometric only
  double zipf_exponent() const;  // zipf only
  std::string describe() const;

 private:
  DelayModel() = default;

  DelayKind kind_ = DelayKind::geometric;
  double success_prob_ = 0.0;
  double zipf_exponent_ = 0.0;
  std::vector<double> pmf_;     // pmf_[t-1] = p_t, bounded kinds only
  std::vector<double> hazard_;  // hazard_[t-1] = q_t, bounded kinds only
};

// Reports PMF sum, hazard-range violations and boundedness of a constructed
// model.  Always ok for models built through the factories above.
DelayValidation validate(const DelayModel& delay);

// Pre-construction check of a raw PMF for DelayModel::explicit_pmf.
DelayValidation validate_pmf(std::span<const double> pmf);

}  // namespace aoii
