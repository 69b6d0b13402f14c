#include "oste/step_function.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "oste/error.hpp"

namespace oste {

StepFunction::StepFunction(CurveKind kind, std::vector<double> knots, std::vector<double> values)
    : kind_(kind), knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) {
    throw ValidationError("step function needs one value per knot");
  }
  double prev_value = initial_value();
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k]) || knots_[k] < 0.0 || (k > 0 && knots_[k] <= knots_[k - 1])) {
      throw ValidationError("step function knots must be finite, >= 0 and strictly increasing");
    }
    const double v = values_[k];
    const bool ok = kind_ == CurveKind::survival ? (v >= 0.0 && v <= 1.0 && v <= prev_value)
                                                 : (std::isfinite(v) && v >= prev_value);
    if (!ok) {
      throw ValidationError(kind_ == CurveKind::survival
                                ? "survival curve values must be non-increasing within [0, 1]"
                                : "cumulative hazard values must be finite and non-decreasing");
    }
    prev_value = v;
  }
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  return it == knots_.begin() ? initial_value() : values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  return it == knots_.begin() ? initial_value() : values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

std::vector<double> StepFunction::evaluate(std::span<const double> sorted_times) const {
  std::vector<double> out;
  out.reserve(sorted_times.size());
  std::size_t k = 0;
  double current = initial_value();
  for (double t : sorted_times) {
    while (k < knots_.size() && knots_[k] <= t) {
      current = values_[k++];
    }
    out.push_back(current);
  }
  return out;
}

std::string StepFunction::to_csv() const {
  auto fmt = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
  };
  std::string out = "time,value\n0," + fmt(initial_value()) + "\n";
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    out += fmt(knots_[k]) + "," + fmt(values_[k]) + "\n";
  }
  return out;
}

}  // namespace oste
