#pragma once

#include <span>
#include <string>
#include <vector>

namespace oste {

enum class CurveKind { survival, cumulative_hazard };

// Right-continuous step function on [0, inf): `initial` on [0, knots[0]),
// values[k] on [knots[k], knots[k+1]).
class StepFunction {
 public:
  StepFunction() = default;
  // Throws ValidationError if the kind's invariants do not hold.
  StepFunction(CurveKind kind, std::vector<double> knots, std::vector<double> values);

  static StepFunction constant_survival() { return StepFunction(CurveKind::survival, {}, {}); }

  CurveKind kind() const { return kind_; }
  double initial_value() const { return kind_ == CurveKind::survival ? 1.0 : 0.0; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return knots_.size(); }

  // Value at the largest knot <= t.
  double operator()(double t) const;
  // Value at the largest knot < t.
  double left_limit(double t) const;
  // Evaluates at each point of a nondecreasing grid in one merge pass.
  std::vector<double> evaluate(std::span<const double> sorted_times) const;

  // "time,value" rows for external plotting, starting at (0, initial value).
  std::string to_csv() const;

  bool operator==(const StepFunction&) const = default;

 private:
  CurveKind kind_ = CurveKind::survival;
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace oste
