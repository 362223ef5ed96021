#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divweb/box.hpp"
#include "divweb/expr.hpp"
#include "divweb/quadrature.hpp"

namespace divweb {

/// Reorders arbitrary block index lists into contiguous ranges.
/// `order[k]` is the original (0-based) index of the variable that ends up
/// at position k; `sizes` are the block sizes in the given block order.
struct BlockLayout {
  std::vector<int> order;
  std::vector<int> sizes;
  bool is_identity() const;
};

/// `blocks` holds 1-based variable indices. Throws PreconditionError unless
/// the lists partition {1..m}.
BlockLayout layout_from_index_lists(const std::vector<std::vector<int>>& blocks, int m);

/// A divergence-free web in adapted coordinates: the density h of
/// Ω = h dx_1 ∧ ... ∧ dx_m and a partition of the coordinates into
/// contiguous blocks, one per foliation.
class WebChart {
 public:
  /// Checks that h is positive at the box corners, its centre and a set of
  /// Halton points; throws PreconditionError on the first failure.
  WebChart(std::vector<std::string> variables, std::vector<int> block_sizes, Expr density, Box domain);

  static WebChart parse(std::vector<std::string> variables, std::vector<int> block_sizes,
                        std::string_view density, Box domain);

  int dim() const { return static_cast<int>(variables_.size()); }
  int block_count() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& block_sizes() const { return sizes_; }
  int block_begin(int i) const { return begins_[static_cast<std::size_t>(i)]; }
  int block_end(int i) const { return block_begin(i) + sizes_[static_cast<std::size_t>(i)]; }
  int block_of(int k) const { return owner_[static_cast<std::size_t>(k)]; }
  bool same_block(int k, int l) const { return block_of(k) == block_of(l); }
  bool is_codim1() const { return block_count() == dim(); }

  const std::vector<std::string>& variables() const { return variables_; }
  const Expr& density() const { return density_; }
  const Box& domain() const { return domain_; }

  /// An expression with the same derivatives as log h (see log_expand).
  const Expr& log_density() const { return log_density_; }

  double h(std::span<const double> x) const { return eval(density_, x); }

  /// Same web on another box.
  WebChart with_domain(Box domain) const;

 private:
  std::vector<std::string> variables_;
  std::vector<int> sizes_;
  std::vector<int> begins_;
  std::vector<int> owner_;
  Expr density_;
  Expr log_density_;
  Box domain_;
};

/// Symmetric m×m matrix of expressions (upper triangle stored).
class SymTensorField {
 public:
  explicit SymTensorField(int m = 0);

  int dim() const { return m_; }
  const Expr& operator()(int k, int l) const;
  void set(int k, int l, Expr e);

  std::vector<double> eval_at(std::span<const double> x) const;  // row-major m×m

 private:
  std::size_t slot(int k, int l) const;
  int m_;
  std::vector<Expr> upper_;
};

/// Cross-block entries ∂²log h/∂x_k∂x_l; same-block entries are 0.
SymTensorField nonuniformity_tensor(const WebChart& w);

struct EntryVerdict {
  int k = 0;
  int l = 0;
  ZeroVerdict verdict;
};

struct TrivialityVerdict {
  bool trivial = true;
  std::vector<EntryVerdict> entries;  // every cross-block pair k < l
  double max_abs = 0.0;               // largest sampled |κ_kl|
  int k = -1, l = -1;                 // entry holding the witness
  std::vector<double> witness;        // empty when trivial
};

TrivialityVerdict is_locally_trivial(const WebChart& w, double tol = kDefaultZeroTolerance,
                                     int samples = kDefaultZeroSamples);

/// Numeric local equivalence with the standard web carrying Lebesgue volume.
///
/// The last coordinate of block i becomes ∫ from p to x of g_i along that
/// axis, with g_i = h(block i free, other blocks at p) / h(p)^((n-1)/n);
/// all other coordinates are unchanged. The anchor p is the origin when it
/// lies in the domain, otherwise the domain centre, unless given.
class TrivializingMap {
 public:
  TrivializingMap(const WebChart& w, QuadratureSpec spec = {}, std::optional<std::vector<double>> anchor = {},
                  double tol = kDefaultZeroTolerance);

  const std::vector<double>& anchor() const { return anchor_; }
  std::vector<double> operator()(std::span<const double> x) const;

  /// Central-difference Jacobian determinant of the forward map.
  double jacobian_determinant(std::span<const double> x, double step = 1e-5) const;

 private:
  WebChart web_;
  QuadratureSpec spec_;
  std::vector<double> anchor_;
  double scale_;  // h(p)^((n-1)/n)
};

/// ω^i_i = Σ_{k∈π_i} ∂_k log h dx_k: one coefficient per coordinate of block i.
std::vector<std::vector<Expr>> connection_form(const WebChart& w);

/// One term c · dx_l ∧ dx_k of Ξ^i_i, with k in block i and l outside it.
struct CurvatureTerm {
  int l = 0;
  int k = 0;
  Expr coefficient;
};

/// Ξ^i_i = dω^i_i; coefficient of dx_l ∧ dx_k is ∂²log h/∂x_l∂x_k.
std::vector<std::vector<CurvatureTerm>> curvature_form(const WebChart& w);

/// Full Ricci tensor Rc_ik = R^j_{ijk} of the coordinate connection of the
/// codimension-1 refinement (Γ^k_kk = ∂_k log h, other symbols 0).
std::vector<std::vector<Expr>> ricci_tensor(const WebChart& w);

/// pr_O(Rc): the cross-block part of the Ricci tensor for w's blocks.
SymTensorField ricci_offdiag(const WebChart& w);

/// Same density, one block per coordinate.
WebChart refine_to_codim1(const WebChart& w);

struct GeodesicPath {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
  bool left_domain = false;
};

inline constexpr int kDefaultGeodesicSteps = 1000;

/// Fixed-step RK4 for ẍ_k + (∂_k log h) ẋ_k² = 0. Stops early, with
/// left_domain set, at the first step that would leave the chart box.
GeodesicPath integrate_geodesic(const WebChart& w, std::span<const double> p, std::span<const double> v,
                                double t_end, int steps = kDefaultGeodesicSteps);

}  // namespace divweb
