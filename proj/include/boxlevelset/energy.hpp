#pragma once

#include <map>
#include <optional>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace boxlevelset {

/// Raised when the configuration cannot serve a request (unknown class id).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Weights and numerical settings of the region level-set energy.
struct EnergyParams {
  double alpha1 = 0.001;
  double alpha2 = 0.001;
  double lambda = 1e-5;
  double mu = 1e-6;

  /// Class-wise data-term weight. Lookup tries `rho_per_class` first, then
  /// `rho_default`; a class covered by neither is a ConfigError.
  std::map<int, double> rho_per_class;
  std::optional<double> rho_default = 0.65;

  /// k in sigmoid(k * phi).
  double sigmoid_slope = 1.0;
  /// Regularizer of |grad| in the normalized-gradient divisor.
  double eps_grad = 1e-8;
  /// Floor for the region-average denominators.
  double eps_denom = 1e-6;

  double rho(int class_id) const;
  /// Throws ValidationError on negative weights or non-positive slopes/eps.
  void validate() const;
};

/// Per-channel soft region means.
struct RegionAverages {
  std::vector<double> inside;
  std::vector<double> outside;
};

struct EnergyBreakdown {
  double data_inside = 0;
  double data_outside = 0;
  double length = 0;
  double area = 0;
  double total = 0;
};

struct LengthArea {
  double length = 0;
  double area = 0;
};

/// Numerically stable logistic function.
double sigmoid(double x);

/// sigmoid(k * phi) per pixel.
Grid<double> foreground_probability(const LevelSetField& phi, double slope);

/// Derivative of the 1-D difference stencil used everywhere in this module:
/// central in the interior, one-sided at the borders, zero along an axis of
/// extent 1. `d_x` differentiates along columns, `d_y` along rows.
double d_x(const Grid<double>& f, int r, int c);
double d_y(const Grid<double>& f, int r, int c);

/// Adds the transpose of the difference stencil applied to (vx, vy) into
/// `out`. The discrete divergence of (vx, vy) is the negation of this.
void add_gradient_adjoint(const Grid<double>& vx, const Grid<double>& vy, Grid<double>& out);

/// Soft inside/outside means of `u` weighted by sigmoid(k phi) and its complement.
RegionAverages region_averages(const NormalizedImage& u, const LevelSetField& phi,
                               const EnergyParams& params);

/// Boundary length sum |grad sigmoid(k phi)| and area sum sigmoid(k phi).
LengthArea length_area(const LevelSetField& phi, const EnergyParams& params);

/// Region energy with averages recomputed from `phi`.
EnergyBreakdown levelset_energy(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params);

/// Region energy with caller-supplied (frozen) averages.
EnergyBreakdown levelset_energy(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params,
                                const RegionAverages& averages);

/// d(energy)/d(phi) with the averages of the current iterate held fixed:
///
///   k sigma'(k phi) [ a1 rho (u - a1*)^2 - a2 rho (u - a2*)^2 - lambda kappa + mu ]
///
/// where kappa is the discrete divergence of grad s / sqrt(|grad s|^2 + eps^2),
/// s = sigmoid(k phi). In the continuum grad s / |grad s| = grad phi / |grad phi|,
/// so kappa is the curvature of the level sets; on the grid this form is the
/// exact derivative of the discrete length.
LevelSetField levelset_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params);
LevelSetField levelset_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                int class_id, const EnergyParams& params,
                                const RegionAverages& averages);

/// Regularized Heaviside 1/2 (1 + 2/pi atan(phi / eps)).
double heaviside(double phi, double eps_h);
/// Its derivative eps / (pi (eps^2 + phi^2)).
double dirac(double phi, double eps_h);

/// Classical two-phase energy: H_eps replaces the sigmoid and the averages are
/// hard means over {phi >= 0} and {phi < 0}. Weighted with the same params.
EnergyBreakdown classical_energy(const NormalizedImage& u, const LevelSetField& phi,
                                 double eps_h, int class_id, const EnergyParams& params);

}  // namespace boxlevelset
