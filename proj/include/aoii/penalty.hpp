#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace aoii {

enum class PenaltyKind { linear, quadratic, logarithmic, table };
enum class TailGrowth { constant, linear, quadratic, logarithmic };

// Nondecreasing, nonnegative time penalty f(delta).  Every supported kind
// keeps sum_delta gamma^delta f(delta) finite for gamma in (0,1); the table
// kind extrapolates linearly past its last entry to preserve that.  A bounded
// penalty (alpha = 0, kappa = 0, or a slope-less table) is permitted but
// flagged as degenerate.
class PenaltyFunction {
 public:
  static PenaltyFunction linear(double alpha, double beta);
  static PenaltyFunction quadratic(double kappa);
  static PenaltyFunction logarithmic(double base);
  static PenaltyFunction table(std::vector<double> values,
                               std::optional<double> slope = std::nullopt);

  double operator()(std::int64_t delta) const;

  PenaltyKind kind() const { return kind_; }
  TailGrowth tail_growth() const;
  bool degenerate_constant() const;

  double linear_alpha() const { return a_; }
  double linear_beta() const { return b_; }
  double quadratic_kappa() const { return a_; }
  double log_base() const { return a_; }
  const std::vector<double>& table_values() const { return values_; }
  std::optional<double> table_slope() const { return slope_; }

 private:
  PenaltyFunction(PenaltyKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  PenaltyKind kind_;
  double a_ = 0.0;  // alpha, kappa, or log base depending on kind
  double b_ = 0.0;  // beta
  std::vector<double> values_;
  std::optional<double> slope_;
};

}  // namespace aoii
