#pragma once

#include <functional>
#include <limits>

#include "lcfem/fem.hpp"

namespace lcfem {

/// Applied magnetic field. A uniform field is sampled once per element;
/// spatially varying fields are sampled at degree-4 quadrature points.
struct MagneticField {
  std::function<Vec3(const Vec3&)> eval;  // empty means zero field
  bool uniform = true;

  bool zero() const { return !eval; }

  static MagneticField none() { return {}; }
  static MagneticField constant(const Vec3& H) {
    return {[H](const Vec3&) { return H; }, true};
  }
  static MagneticField varying(std::function<Vec3(const Vec3&)> f) {
    return {std::move(f), false};
  }
};

/// Elastic moduli k1 (splay), k2 (twist), k3 (bend), all positive. k4
/// (saddle-splay) is carried as metadata only: with Dirichlet data its
/// energy contribution is a constant and never enters the computation.
struct FrankConstants {
  double k1 = 1.0, k2 = 1.0, k3 = 1.0;
  double k4 = 0.0;
  double chi_A = 0.0;  // diamagnetic anisotropy, >= 0
  MagneticField field;
};

/// c0 = min(k1,k2,k3) > 0 and ci = ki - c0 >= 0; at least one ci vanishes.
struct ModifiedConstants {
  double c0 = 1.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

/// Derives the modified moduli; throws std::invalid_argument unless
/// k1,k2,k3 > 0 and chi_A >= 0.
ModifiedConstants modified_constants(const FrankConstants& fc);

struct EnergyBreakdown {
  double one_constant = 0.0;  // (c0/2) int |grad n|^2
  double splay_w = 0.0;       // (c1/2) * splay
  double twist_w = 0.0;       // (c2/2) * twist
  double bend_w = 0.0;        // (c3/2) * bend
  double magnetic = 0.0;      // -(chi_A/2) int (n.H)^2
  double total = 0.0;

  // Unweighted functionals.
  double splay = 0.0;  // int (div n)^2
  double twist = 0.0;  // int (n . curl n)^2
  double bend = 0.0;   // int |n x curl n|^2

  double elastic() const { return total - magnetic; }
};

/// Element-exact evaluation of all energy contributions (the integrands are
/// at most quadratic per element for P1 fields and constant H).
EnergyBreakdown energy(const P1Space& space, const DirectorField& n, const FrankConstants& fc);

/// Same with the modified moduli supplied directly; lets callers switch
/// individual terms on and off.
EnergyBreakdown energy_terms(const P1Space& space, const DirectorField& n,
                             const ModifiedConstants& mc, double chi_A, const MagneticField& H);

/// Assembled negative first variation on interior unknowns:
/// f.v = -[ c0 (grad n, grad v) + c1 (div n, div v)
///          + c2 (n.curl n, v.curl n + n.curl v)
///          + c3 (n x curl n, v x curl n + n x curl v)
///          - chi_A (n.H, v.H) ].
std::vector<double> first_variation(const P1Space& space, const DirectorField& n,
                                    const FrankConstants& fc, const DofMap& dofs);

std::vector<double> first_variation_terms(const P1Space& space, const DirectorField& n,
                                          const ModifiedConstants& mc, double chi_A,
                                          const MagneticField& H, const DofMap& dofs);

constexpr double kLinf = std::numeric_limits<double>::infinity();

/// Unit-length violation err_p = || I_h[|n|^2 - 1] ||_{L^p} for p = 1 or
/// p = infinity. The L^1 norm integrates the absolute value of the linear
/// interpolant exactly by splitting elements along its zero set.
double constraint_error(const P1Space& space, const DirectorField& n, double p);

/// L^2 trace distance || n - g || over the Dirichlet part of the boundary,
/// by face quadrature.
double boundary_error(const P1Space& space, const DirectorField& n,
                      const std::function<Vec3(const Vec3&)>& g, const BoundaryClassification& bc);

/// Stability margin 8 (k2 - k1) + k3 of the radial point defect; negative
/// values mean the defect is unstable and the flow will leave it.
double helein_margin(const FrankConstants& fc);

/// Critical field strength (1 / (2 w)) sqrt(k1 / chi_A) of the splay
/// transition in a cell of thickness w.
double freedericksz_threshold(double k1, double chi_A, double w);

}  // namespace lcfem
