#pragma once

#include <optional>

#include "fblab/errors.hpp"
#include "fblab/util.hpp"

namespace fblab {

// Problem data for the half-disc cavitation problem: on the flat boundary
// segment {x1 = 0, -1 < x2 < 1} the boundary datum is
//     f(x2) = alpha_plus * max(x2, 0) + alpha_minus * min(x2, 0)
// (optionally perturbed downstream), and the volume term weight is
//     Lambda = lambda_plus^2 - lambda_minus^2.
struct ProblemSpec {
  double alpha_plus = 1.0;
  double alpha_minus = 0.0;
  double lambda_plus = 1.4142135623730951;  // sqrt(2)
  double lambda_minus = 0.0;

  // Radial perturbation g(x) = g_coeff * |x|^(1 + g_exponent) added to the
  // flat-segment datum. g_coeff == 0 turns the perturbation off; g_exponent
  // is the superlinear excess kappa > 0, so g vanishes faster than linearly
  // at the origin.
  double g_coeff = 0.0;
  double g_exponent = 0.5;
};

// g(x) evaluated at distance r = |x| from the origin.
double g_value(const ProblemSpec& spec, double r);

// Boundary datum on the flat segment {x1 = 0}:
//   f(x2) = alpha_plus * x2^+ - alpha_minus * x2^- + g(|x2|).
double flat_datum(const ProblemSpec& spec, double x2);

// Qualitative classification of the derived parameters.
//   WedgePair: Lambda > alpha_plus^2 - alpha_minus^2 > 0. Two one-homogeneous
//     half-plane solutions exist, with kink rays at polar angles theta and
//     pi - theta from the +x2 axis, where cot(theta) = gamma.
//   DegenerateTangential: Lambda == slope_gap, gamma == 0: the two wedge
//     solutions coincide and the kink ray is the +x1 axis (theta == pi/2).
//   NoFreeBoundary: Lambda < slope_gap: the datum's slope pair is too strong
//     for any one-homogeneous kinked solution; the volume term cannot bend
//     the level line into the half-disc.
//   TangentialData: slope_gap == 0 (alpha_plus == alpha_minus): the datum is
//     linear, the candidate kink angle collapses onto the flat boundary.
enum class Regime { WedgePair, DegenerateTangential, NoFreeBoundary, TangentialData };

struct DerivedParams {
  double Lambda = 0.0;     // lambda_plus^2 - lambda_minus^2
  double slope_gap = 0.0;  // alpha_plus^2 - alpha_minus^2
  Regime regime = Regime::WedgePair;
  // gamma and theta are present only for WedgePair / DegenerateTangential.
  std::optional<double> gamma;  // sqrt(Lambda / slope_gap - 1)
  std::optional<double> theta;  // atan2(1, gamma), in (0, pi/2]
};

// Validates the data and computes Lambda, slope_gap, gamma, theta.
// Throws Error with code:
//   NonPositiveLambda  if lambda_plus^2 - lambda_minus^2 <= 0,
//   DegenerateData     if alpha_plus <= 0,
//   TwoPhaseOrderError if alpha_minus < 0 or lambda_minus < 0 or
//                      alpha_minus > alpha_plus.
DerivedParams derive_params(const ProblemSpec& spec);

// The two one-homogeneous global solutions. Writing t = d . x with
// d = (-gamma, 1) for Small and d = (gamma, 1) for Large,
//     v(x) = alpha_plus * max(t, 0) + alpha_minus * min(t, 0).
// Small <= Large pointwise on {x1 >= 0}. The kink ray {t = 0, x1 > 0} sits at
// polar angle theta (Small) or pi - theta (Large) from the +x2 axis.
enum class Branch { Small, Large };

struct GlobalSolution {
  Branch branch = Branch::Small;
  double alpha_plus = 1.0;
  double alpha_minus = 0.0;
  double gamma = 1.0;

  // Direction vector d of the linear argument t = d . x.
  Vec2 direction() const {
    return branch == Branch::Small ? Vec2(-gamma, 1.0) : Vec2(gamma, 1.0);
  }
  // Volume weight consistent with the zero jump condition on the kink ray:
  // |grad v_+|^2 - |grad v_-|^2 = (alpha_plus^2 - alpha_minus^2)(1 + gamma^2).
  double lambda_weight() const {
    return (alpha_plus * alpha_plus - alpha_minus * alpha_minus) * (1.0 + gamma * gamma);
  }
  double theta() const { return arccot(gamma); }
  // Angle of the positivity sector {v > 0} within the half-disc:
  // theta for Small, pi - theta for Large.
  double positive_sector_angle() const;
};

// Builds the requested branch from validated data. Throws
// Error(InvalidArgument) unless the regime is WedgePair or
// DegenerateTangential.
GlobalSolution global_solution(const ProblemSpec& spec, Branch branch);

// Direct construction from explicit slope data (no validation beyond
// gamma >= 0, alpha_plus > 0, 0 <= alpha_minus <= alpha_plus).
GlobalSolution make_solution(double alpha_plus, double alpha_minus, double gamma, Branch branch);

double eval_global(const GlobalSolution& sol, const Vec2& x);

// Gradient; on the kink ray {t == 0} returns the one-sided limit from the
// positive phase.
Vec2 grad_global(const GlobalSolution& sol, const Vec2& x);

// Flux balance across the kink ray against an externally supplied volume
// weight: |grad v_+|^2 - |grad v_-|^2 - Lambda. Zero (to rounding) when
// Lambda comes from derive_params on consistent data.
double jump_defect(const GlobalSolution& sol, double Lambda);

// Unit vector along the kink ray {t = 0} inside {x1 > 0}.
Vec2 free_boundary_ray(const GlobalSolution& sol);

// Polar angle (from +x2 toward +x1) of the kink ray: theta or pi - theta.
double ray_polar_angle(const GlobalSolution& sol);

// Open cone with apex (0, apex_x2) on the flat boundary, axis +x1:
// {x : x1 > delta * |x2 - apex_x2|}. Strict inequality; larger delta means a
// narrower cone.
bool in_nt_cone(const Vec2& x, double apex_x2, double delta);

// Open angular cone of aperture parameter sigma around the kink ray of the
// given branch (slope gamma). For the Small branch this is
// {x2/(gamma+sigma) < x1 < x2/(gamma-sigma)} in angular form: polar angle
// strictly between arccot(gamma+sigma) and arccot(gamma-sigma); the Large
// branch uses the mirror sector. Valid for all sigma > 0, including
// sigma >= gamma (the sector then crosses the +x1 axis).
bool in_sigma_cone(const Vec2& x, double gamma, double sigma, Branch branch);

// Which positivity sector the density term charges in the closed-form energy
// below.
//   ExactSector: the branch's own sector, angle theta (Small) or pi - theta
//     (Large).
//   CommonSector: the convention that charges both branches the same sector
//     of angle pi/2 + theta (the set where each branch agrees in sign with
//     the boundary datum's phases). Under this convention the density term
//     cancels in Small-vs-Large comparisons, and the energy gap equals the
//     boundary flux value gamma * (alpha_plus^2 - alpha_minus^2).
enum class PhaseConvention { ExactSector, CommonSector };

// Terms of the scale-invariant boundary-adjusted energy at radius 1 centered
// at the origin for a one-homogeneous solution:
//   total = dirichlet + lambda * phase_area - sphere
// with dirichlet = integral of |grad v|^2 over the unit half-disc,
// phase_area = area charged by the density term, sphere = integral of v^2
// over the unit half-circle arc. One-homogeneity makes the value independent
// of the radius.
struct WeissParts {
  double dirichlet = 0.0;
  double phase_area = 0.0;
  double sphere = 0.0;
  double lambda = 0.0;
  double total() const { return dirichlet + lambda * phase_area - sphere; }
};

WeissParts weiss_closed_form(const GlobalSolution& sol, PhaseConvention convention);

}  // namespace fblab
