#pragma once

#include <array>
#include <span>
#include <vector>

#include "divweb/quadrature.hpp"
#include "divweb/web.hpp"

namespace divweb {

/// Oriented box ⟨a, b⟩; axis k is positively oriented when b_k > a_k.
struct Region {
  std::vector<double> a;
  std::vector<double> b;

  Region(std::vector<double> a_, std::vector<double> b_);
  static Region from_box(const Box& box) { return Region(box.lo, box.hi); }

  std::size_t dim() const { return a.size(); }
  int orientation() const;  // product of per-axis signs
  Box box() const;          // unoriented extent
  double diameter() const { return box().diameter(); }
};

/// Signed ∫_R h: the sign is the region's orientation.
QuadResult region_volume(const WebChart& w, const Region& R, const QuadratureSpec& spec = {});

/// Ω-volumes of the four parts of K cut at p along axes i and j:
/// a: x_i <= p_i, x_j >= p_j    b: x_i >= p_i, x_j >= p_j
/// c: x_i >= p_i, x_j <= p_j    d: x_i <= p_i, x_j <= p_j
struct SubdivisionVolumes {
  double a = 0, b = 0, c = 0, d = 0;
  double error = 0;  // summed quadrature error estimates
};

SubdivisionVolumes subdivision_volumes(const WebChart& w, const Region& K, std::span<const double> p, int i, int j,
                                       const QuadratureSpec& spec = {});

struct ProductReport {
  SubdivisionVolumes volumes;
  double bd_minus_ac = 0;
  double kappa = 0;        // κ_ij(p)
  double diameter = 0;     // of K
  double tolerance = 0;    // bound on the quadrature noise in bd − ac
  bool consistent = false; // sign(bd − ac) agrees with sign(κ_ij(p))
};

ProductReport check_product_condition(const WebChart& w, const Region& K, std::span<const double> p, int i, int j,
                                      const QuadratureSpec& spec = {});

struct SplitResult {
  std::vector<int> axes;
  std::vector<double> cuts;          // one hyperplane offset per axis
  std::vector<double> cell_volumes;  // 2^k cells, bit t of the index set = upper side of axes[t]
  double spread = 0;                 // max − min cell volume
  double tolerance = 0;
  bool equal = false;                // spread <= tolerance
};

/// Cuts each axis at its marginal Ω-half-volume, then measures all 2^k
/// cells. For trivial webs the cells are equal; otherwise `spread`
/// witnesses the failure.
SplitResult equal_split(const WebChart& w, const Region& K, const std::vector<int>& axes,
                        const QuadratureSpec& spec = {}, double tol = 1e-8);

/// Controls of the reflection solver.
struct ReflectionSpec {
  QuadratureSpec quad{1e-13, 40, 7};
  double rel_tol = 1e-12;  // |g| tolerance relative to the box volume being matched
  int max_iterations = 100;
};

struct ReflectionResult {
  std::vector<double> image;
  int iterations = 0;
  double residual = 0;   // achieved |g_i|
  double tolerance = 0;  // requested bound on |g_i|
};

/// Volume-preserving reflection of q across the leaf through p normal to
/// axis i: the point q' differing from q only in coordinate i with
/// ∫_⟨p,q⟩ Ω + ∫_⟨p,q'⟩ Ω = 0. Requires a codimension-1 web.
ReflectionResult reflect(const WebChart& w, std::span<const double> p, int i, std::span<const double> q,
                         const ReflectionSpec& spec = {});

/// r_j ∘ r_i ∘ r_j ∘ r_i applied to q.
std::vector<double> loop(const WebChart& w, std::span<const double> p, int i, int j, std::span<const double> q,
                         const ReflectionSpec& spec = {});

/// loop(q) − q.
std::vector<double> holonomy_defect(const WebChart& w, std::span<const double> p, int i, int j,
                                    std::span<const double> q, const ReflectionSpec& spec = {});

struct CurvatureFit {
  std::vector<double> scales;
  std::vector<double> ratios;  // (d_i − d_j) / (2 s^3) per scale
  double kappa_hat = 0;
  double slope = 0;            // first-order coefficient of the fit
  double residual = 0;         // RMS misfit
  double noise = 0;            // solver noise propagated to the ratios
  bool ill_conditioned = false;
  double kappa = 0;            // symbolic κ_ij(p)
};

/// Fits (d_i − d_j)/(2 s^3) ≈ κ + c s over the given scales, where d is the
/// holonomy defect at q = p + s e_i + s e_j.
CurvatureFit fit_loop_curvature(const WebChart& w, std::span<const double> p, int i, int j,
                                const std::vector<double>& scales, const ReflectionSpec& spec = {});

struct TaylorCoefficient {
  int j = -1;  // -1 for α_i, else the second index of α_ij
  double estimate = 0;
  double symbolic = 0;
  double error = 0;  // |estimate − symbolic| / max(|symbolic|, 1)
};

struct TaylorCheck {
  std::vector<double> scales;
  std::vector<TaylorCoefficient> coefficients;  // α_i first, then α_ij for j != i
  double max_error = 0;
};

/// Recovers α_i = ∂_i log h(p) and α_ij = ∂_i∂_j log h(p) from reflections of
/// q = p + s e_i (± s e_j) using
///   z = −s − α_i s² − α_i² s³ − ½ α_ij s² x_j + O(4)
/// and a fit in s over the scales. Empty scales pick four halvings from a
/// step that fits the domain.
TaylorCheck reflection_taylor_check(const WebChart& w, std::span<const double> p, int i,
                                    std::vector<double> scales = {}, const ReflectionSpec& spec = {});

/// Least squares fit y ≈ c0 + c1 s. Returns {c0, c1, rms}.
std::array<double, 3> fit_linear(const std::vector<double>& s, const std::vector<double>& y);

}  // namespace divweb
