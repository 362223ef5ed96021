#include <algorithm>
#include <sstream>

#include "divweb/error.hpp"
#include "divweb/web.hpp"

namespace divweb {

bool BlockLayout::is_identity() const {
  for (std::size_t k = 0; k < order.size(); ++k)
    if (order[k] != static_cast<int>(k)) return false;
  return true;
}

BlockLayout layout_from_index_lists(const std::vector<std::vector<int>>& blocks, int m) {
  BlockLayout out;
  std::vector<int> seen(static_cast<std::size_t>(std::max(m, 0)), 0);
  for (const auto& b : blocks) {
    if (b.empty()) throw PreconditionError("blocks must be nonempty");
    for (int idx : b) {
      if (idx < 1 || idx > m)
        throw PreconditionError("block index " + std::to_string(idx) + " outside 1.." + std::to_string(m));
      if (seen[static_cast<std::size_t>(idx - 1)]++)
        throw PreconditionError("index " + std::to_string(idx) + " appears in more than one block");
      out.order.push_back(idx - 1);
    }
    out.sizes.push_back(static_cast<int>(b.size()));
  }
  for (int k = 0; k < m; ++k)
    if (!seen[static_cast<std::size_t>(k)])
      throw PreconditionError("index " + std::to_string(k + 1) + " is not in any block");
  return out;
}

WebChart::WebChart(std::vector<std::string> variables, std::vector<int> block_sizes, Expr density, Box domain)
    : variables_(std::move(variables)),
      sizes_(std::move(block_sizes)),
      density_(std::move(density)),
      domain_(std::move(domain)) {
  const int m = dim();
  if (m < 1) throw PreconditionError("chart dimension must be positive");
  int total = 0;
  for (int s : sizes_) {
    if (s < 1) throw PreconditionError("blocks must be nonempty");
    begins_.push_back(total);
    for (int j = 0; j < s; ++j) owner_.push_back(static_cast<int>(begins_.size()) - 1);
    total += s;
  }
  if (total != m)
    throw PreconditionError("block sizes sum to " + std::to_string(total) + ", dimension is " + std::to_string(m));
  if (static_cast<int>(domain_.dim()) != m) throw PreconditionError("domain dimension differs from chart dimension");
  for (int k = 0; k < m; ++k)
    if (!(domain_.lo[static_cast<std::size_t>(k)] < domain_.hi[static_cast<std::size_t>(k)]))
      throw PreconditionError("domain min must be below max on axis " + variables_[static_cast<std::size_t>(k)]);

  auto check = [&](const std::vector<double>& x) {
    const double v = eval(density_, x);
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "density is not positive at " << format_point(x) << " (value " << v << ")";
      throw PreconditionError(msg.str());
    }
  };
  if (m <= 10) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      std::vector<double> x(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k)
        x[static_cast<std::size_t>(k)] = (mask >> k) & 1u ? domain_.hi[static_cast<std::size_t>(k)]
                                                          : domain_.lo[static_cast<std::size_t>(k)];
      check(x);
    }
  }
  check(domain_.center());
  for (const auto& x : halton_points(domain_, 256)) check(x);

  log_density_ = log_expand(density_);
}

WebChart WebChart::parse(std::vector<std::string> variables, std::vector<int> block_sizes,
                         std::string_view density, Box domain) {
  Expr h = parse_expr(density, variables);
  return WebChart(std::move(variables), std::move(block_sizes), std::move(h), std::move(domain));
}

WebChart WebChart::with_domain(Box domain) const { return WebChart(variables_, sizes_, density_, std::move(domain)); }

SymTensorField::SymTensorField(int m) : m_(m), upper_(static_cast<std::size_t>(m * (m + 1) / 2)) {}

std::size_t SymTensorField::slot(int k, int l) const {
  if (k > l) std::swap(k, l);
  if (k < 0 || l >= m_) throw std::out_of_range("SymTensorField index");
  return static_cast<std::size_t>(k * m_ - k * (k - 1) / 2 + (l - k));
}

const Expr& SymTensorField::operator()(int k, int l) const { return upper_[slot(k, l)]; }
void SymTensorField::set(int k, int l, Expr e) { upper_[slot(k, l)] = std::move(e); }

std::vector<double> SymTensorField::eval_at(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(m_ * m_));
  for (int k = 0; k < m_; ++k)
    for (int l = k; l < m_; ++l) {
      const double v = eval((*this)(k, l), x);
      out[static_cast<std::size_t>(k * m_ + l)] = v;
      out[static_cast<std::size_t>(l * m_ + k)] = v;
    }
  return out;
}

WebChart refine_to_codim1(const WebChart& w) {
  return WebChart(w.variables(), std::vector<int>(static_cast<std::size_t>(w.dim()), 1), w.density(), w.domain());
}

}  // namespace divweb
