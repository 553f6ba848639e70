#pragma once

#include <functional>
#include <vector>

#include "boxlevelset/constraints.hpp"
#include "boxlevelset/energy.hpp"
#include "boxlevelset/grid.hpp"

namespace boxlevelset {

/// Initial contour: signed distance to the box outline, clamped to +-5.
inline constexpr double kInitClamp = 5.0;

struct EvolveConfig {
  /// Largest per-pixel change of phi in the first trial step; later trial
  /// steps adapt (see evolve_instance).
  double step_size = 1.0;
  int max_iters = 500;
  /// Stop once the relative change of the total loss drops below this.
  double tol = 1e-6;
  double backtrack_factor = 0.5;
  /// Stride between snapshots handed to the sink; 0 disables them.
  int snapshot_every = 0;
  /// Consecutive rejected trial steps before giving up.
  int max_halvings = 20;
  /// Loss composition: the region energy and the box/background constraints.
  bool use_levelset = true;
  bool use_constraints = true;

  void validate() const;
};

struct EvolveResult {
  LevelSetField phi;
  BinaryMask mask;
  /// Total loss at the initialization followed by every accepted step.
  std::vector<double> energy_trace;
  int iterations_used = 0;
  bool converged = false;
};

/// Called with (iteration, phi) every `snapshot_every` iterations, starting
/// with iteration 0.
using SnapshotSink = std::function<void(int, const LevelSetField&)>;

/// Loss value and gradient of the composite objective at one iterate.
struct SegmentationLoss {
  double levelset = 0;
  double constraints = 0;
  double total() const { return levelset + constraints; }
};

/// Signed distance from each region pixel (x, y) to the outline of the box
/// rectangle, positive inside, clamped to [-clamp, clamp].
LevelSetField initialize_phi(const EnlargedRegion& region, const BoxAnnotation& box,
                             double clamp = kInitClamp);

/// Foreground iff sigmoid(k phi) > 0.5, i.e. phi > 0.
BinaryMask threshold_mask(const LevelSetField& phi, const EnergyParams& params);

/// Total segmentation loss of `phi` (averages recomputed).
SegmentationLoss segmentation_loss(const NormalizedImage& u, const LevelSetField& phi,
                                   int class_id, const BinaryRegionMasks& masks,
                                   const EnergyParams& params, const EvolveConfig& cfg);

/// Gradient of the total loss with the region averages held fixed.
LevelSetField segmentation_gradient(const NormalizedImage& u, const LevelSetField& phi,
                                    int class_id, const BinaryRegionMasks& masks,
                                    const EnergyParams& params, const EvolveConfig& cfg);

/// Gradient descent on phi over the region crop `u`.
///
/// Each iteration recomputes the region averages, takes the gradient with the
/// averages frozen, and tries phi - eta * g. A trial that increases the loss
/// is rejected and eta shrinks by backtrack_factor; an accepted trial grows
/// eta by 1 / backtrack_factor for the next iteration. eta starts at
/// step_size / max|g|. After max_halvings consecutive rejections the run ends
/// with converged = false.
EvolveResult evolve_instance(const NormalizedImage& u, const BoxAnnotation& box,
                             const EnlargedRegion& region, const EnergyParams& params,
                             const EvolveConfig& cfg, const SnapshotSink& sink = {});

}  // namespace boxlevelset
