#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "divweb/quadrature.hpp"
#include "divweb/web.hpp"

namespace divweb {

/// Variables and contiguous block sizes shared by tensors and boundary data.
struct BlockFrame {
  std::vector<std::string> variables;
  std::vector<int> block_sizes;

  int dim() const { return static_cast<int>(variables.size()); }
  int block_of(int k) const;
  int block_begin(int i) const;
  static BlockFrame of(const WebChart& w) { return {w.variables(), w.block_sizes()}; }
};

/// Density restricted to each axis leaf: `per_block[i]` may only depend on
/// the variables of block i. All of them must agree at the origin.
struct BoundaryData {
  std::vector<Expr> per_block;

  /// Values at 0 of every block expression; throws PreconditionError when
  /// they differ, an expression uses another block's variable, or h_i(0) <= 0.
  double validate(const BlockFrame& frame) const;

  /// h restricted to each axis leaf (other blocks set to 0).
  static BoundaryData from_density(const WebChart& w);
};

struct AdmissibilityVerdict {
  bool admissible = true;
  int condition = 0;              // 1 symmetry, 2 same-block zero, 3 compatibility
  std::vector<int> indices;       // offending (k, l) or (a, b, c), 0-based
  std::vector<double> point;      // witness
  double magnitude = 0;           // size of the violation at the witness
  std::string message;
};

/// Checks the three identities satisfied by nonuniformity tensors:
/// (1) A_kl = A_lk, (2) A_kl = 0 within a block, (3) ∂_a A_bc = ∂_b A_ac
/// whenever c's block differs from those of a and b. `A` is a full m×m
/// matrix; entries are compared symbolically, then by sampling `domain`.
AdmissibilityVerdict check_tensor_admissible(const std::vector<std::vector<Expr>>& A, const BlockFrame& frame,
                                             const Box& domain, double tol = kDefaultZeroTolerance);
AdmissibilityVerdict check_tensor_admissible(const SymTensorField& A, const BlockFrame& frame, const Box& domain,
                                             double tol = kDefaultZeroTolerance);

/// Values on a tensor grid (row-major, last axis fastest).
struct DensityGrid {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::vector<std::size_t> shape() const;
  std::vector<double> point(std::size_t flat) const;
};

/// `n` evenly spaced points from lo to hi on each axis; 0 must be a node.
std::vector<std::vector<double>> uniform_axes(const Box& box, int n);

enum class PairRule { kFirst, kLast };

/// Rebuilds h on the grid from A and the axis-leaf data. A point whose
/// nonzero coordinates span two or more blocks uses
///   h(x) = h(x|x_j=0) h(x|x_k=0) / h(x|x_j=x_k=0) · exp(∫_0^{x_j}∫_0^{x_k} A_jk)
/// with (j, k) the lexicographically first (or last) cross-block pair of
/// nonzero coordinates; the three smaller points are memoized.
DensityGrid reconstruct_density(const SymTensorField& A, const BoundaryData& bd, const BlockFrame& frame,
                                const std::vector<std::vector<double>>& axes, const QuadratureSpec& spec = {},
                                PairRule rule = PairRule::kFirst);

struct RoundTrip {
  double max_rel_error = 0;
  std::vector<double> worst_point;
};

/// Reconstructs w's density from its own tensor and axis data and compares
/// with direct evaluation on the grid.
RoundTrip roundtrip_error(const WebChart& w, const std::vector<std::vector<double>>& axes,
                          const QuadratureSpec& spec = {}, PairRule rule = PairRule::kFirst);

/// Chart change making the density 1 on the cross of axis leaves through 0.
///
/// In each block the leading coordinate becomes
///   (1/h(0)) ∫_0^{x_lead} h(0, .., t, rest of block, 0, ..) dt,
/// other coordinates are kept, and the first coordinate is finally scaled by
/// h(0). The Jacobian is h(0) Π_i h(x_i, 0) / h(0).
class NormalizedChart {
 public:
  explicit NormalizedChart(const WebChart& w, QuadratureSpec spec = {});

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> inverse(std::span<const double> y) const;
  double jacobian(std::span<const double> x) const;
  /// Transformed density at the image of source point x.
  double density_at_source(std::span<const double> x) const { return web_.h(x) / jacobian(x); }
  /// Transformed density at a point of the new chart.
  double density(std::span<const double> y) const { return density_at_source(inverse(y)); }

  const WebChart& source() const { return web_; }

 private:
  double leading_integral(std::span<const double> x, int block) const;
  double block_factor(std::span<const double> x, int block) const;

  WebChart web_;
  QuadratureSpec spec_;
  double h0_;
};

struct PlanarInvariants {
  double kappa0 = 0;
  double a = 0;
  double factor_x = 0;  // h ∂_x κ − ∂_x h κ at p
  double factor_y = 0;
  bool generic = false;
};

inline constexpr double kGenericityThreshold = 1e-8;

/// κ0 = κ(p)/h(p), a = |(h∂_xκ − ∂_xh κ)(h∂_yκ − ∂_yh κ)/h^5|^(1/2).
PlanarInvariants planar_invariants(const WebChart& w, std::span<const double> p);

struct CanonicalFormReport {
  PlanarInvariants invariants;
  int quarter_turns = 0;       // applications of (x, y) -> (y, -x)
  double scale = 1;            // c in (x, y) -> (c x, y / c)
  double kappa0_canonical = 0; // κ0 after the rotation
  std::map<std::string, double> jet;  // derivatives of h at 0 in canonical coordinates
  bool jet_matches = false;
  std::vector<double> remainder_radii;
  std::vector<double> remainder;     // max |h − jet| on circles of those radii
  bool remainder_consistent = false; // decays like r^4
};

/// Requires a normalized (h = 1 on both axes), generic planar chart.
CanonicalFormReport canonical_form_report(const WebChart& w, double tol = 1e-8);

/// Whether h = 1 on the axis cross (sampled, |h − 1| <= tol).
bool is_normalized(const WebChart& w, double tol = 1e-9, int samples = 33);

}  // namespace divweb
