#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace divweb {

/// Axis-aligned closed box lo <= x <= hi.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);

  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> x, double slack = 0.0) const;
  std::vector<double> center() const;
  double diameter() const;
};

std::string format_point(std::span<const double> x);

}  // namespace divweb
