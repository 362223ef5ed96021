#include "divweb/box.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace divweb {

Box::Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw std::invalid_argument("Box: corner dimensions differ");
}

bool Box::contains(std::span<const double> x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return false;
  return true;
}

std::vector<double> Box::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = 0.5 * (lo[k] + hi[k]);
  return c;
}

double Box::diameter() const {
  double s = 0.0;
  for (std::size_t k = 0; k < lo.size(); ++k) s += (hi[k] - lo[k]) * (hi[k] - lo[k]);
  return std::sqrt(s);
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

}  // namespace divweb
