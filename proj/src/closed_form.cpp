#include "fblab/closed_form.hpp"

#include <algorithm>
#include <cmath>

namespace fblab {

double g_value(const ProblemSpec& spec, double r) {
  if (spec.g_coeff == 0.0) return 0.0;
  return spec.g_coeff * std::pow(std::abs(r), 1.0 + spec.g_exponent);
}

double flat_datum(const ProblemSpec& spec, double x2) {
  return spec.alpha_plus * std::max(x2, 0.0) + spec.alpha_minus * std::min(x2, 0.0) +
         g_value(spec, x2);
}

DerivedParams derive_params(const ProblemSpec& spec) {
  if (!(spec.alpha_plus > 0.0))
    throw Error(Err::DegenerateData, "alpha_plus must be positive");
  if (spec.alpha_minus < 0.0)
    throw Error(Err::TwoPhaseOrderError, "alpha_minus must be nonnegative");
  if (spec.lambda_minus < 0.0)
    throw Error(Err::TwoPhaseOrderError, "lambda_minus must be nonnegative");
  if (spec.alpha_minus > spec.alpha_plus)
    throw Error(Err::TwoPhaseOrderError, "alpha_minus must not exceed alpha_plus");
  if (spec.g_coeff < 0.0)
    throw Error(Err::InvalidArgument, "g_coeff must be nonnegative");
  if (!(spec.g_exponent > 0.0))
    throw Error(Err::InvalidArgument, "g_exponent must be positive");

  DerivedParams d;
  d.Lambda = spec.lambda_plus * spec.lambda_plus - spec.lambda_minus * spec.lambda_minus;
  if (!(d.Lambda > 0.0))
    throw Error(Err::NonPositiveLambda, "lambda_plus^2 - lambda_minus^2 must be positive");
  d.slope_gap = spec.alpha_plus * spec.alpha_plus - spec.alpha_minus * spec.alpha_minus;

  if (d.slope_gap == 0.0) {
    d.regime = Regime::TangentialData;
    return d;
  }
  const double ratio = d.Lambda / d.slope_gap;
  if (ratio < 1.0) {
    d.regime = Regime::NoFreeBoundary;
    return d;
  }
  if (ratio == 1.0) {
    d.regime = Regime::DegenerateTangential;
    d.gamma = 0.0;
    d.theta = std::atan2(1.0, 0.0);  // pi/2
    return d;
  }
  d.regime = Regime::WedgePair;
  d.gamma = std::sqrt(ratio - 1.0);
  d.theta = std::atan2(1.0, *d.gamma);
  return d;
}

double GlobalSolution::positive_sector_angle() const {
  const double th = theta();
  return branch == Branch::Small ? th : std::atan2(0.0, -1.0) - th;  // theta or pi - theta
}

GlobalSolution global_solution(const ProblemSpec& spec, Branch branch) {
  const DerivedParams d = derive_params(spec);
  if (d.regime != Regime::WedgePair && d.regime != Regime::DegenerateTangential)
    throw Error(Err::InvalidArgument, "no one-homogeneous kinked solution in this regime");
  return make_solution(spec.alpha_plus, spec.alpha_minus, *d.gamma, branch);
}

GlobalSolution make_solution(double alpha_plus, double alpha_minus, double gamma, Branch branch) {
  if (!(alpha_plus > 0.0))
    throw Error(Err::InvalidArgument, "alpha_plus must be positive");
  if (alpha_minus < 0.0 || alpha_minus > alpha_plus)
    throw Error(Err::InvalidArgument, "alpha_minus must lie in [0, alpha_plus]");
  if (gamma < 0.0) throw Error(Err::InvalidArgument, "gamma must be nonnegative");
  GlobalSolution s;
  s.branch = branch;
  s.alpha_plus = alpha_plus;
  s.alpha_minus = alpha_minus;
  s.gamma = gamma;
  return s;
}

double eval_global(const GlobalSolution& sol, const Vec2& x) {
  const double t = sol.direction().dot(x);
  return sol.alpha_plus * std::max(t, 0.0) + sol.alpha_minus * std::min(t, 0.0);
}

Vec2 grad_global(const GlobalSolution& sol, const Vec2& x) {
  const Vec2 d = sol.direction();
  const double t = d.dot(x);
  const double slope = t >= 0.0 ? sol.alpha_plus : sol.alpha_minus;
  return slope * d;
}

double jump_defect(const GlobalSolution& sol, double Lambda) {
  const double g2 = 1.0 + sol.gamma * sol.gamma;
  const double grad_pos_sq = sol.alpha_plus * sol.alpha_plus * g2;
  const double grad_neg_sq = sol.alpha_minus * sol.alpha_minus * g2;
  return grad_pos_sq - grad_neg_sq - Lambda;
}

Vec2 free_boundary_ray(const GlobalSolution& sol) {
  // {d . x = 0, x1 > 0}: orthogonal to d with positive first component.
  const double x2 = sol.branch == Branch::Small ? sol.gamma : -sol.gamma;
  return Vec2(1.0, x2).normalized();
}

double ray_polar_angle(const GlobalSolution& sol) {
  const Vec2 r = free_boundary_ray(sol);
  return polar_angle(r);
}

bool in_nt_cone(const Vec2& x, double apex_x2, double delta) {
  return x.x() > delta * std::abs(x.y() - apex_x2);
}

bool in_sigma_cone(const Vec2& x, double gamma, double sigma, Branch branch) {
  if (!(sigma > 0.0)) throw Error(Err::InvalidArgument, "sigma must be positive");
  if (x.x() == 0.0 && x.y() == 0.0) return false;
  const double phi = polar_angle(x);
  const double lo = arccot(gamma + sigma);
  const double hi = arccot(gamma - sigma);
  if (branch == Branch::Small) return lo < phi && phi < hi;
  const double pi = std::atan2(0.0, -1.0);
  return pi - hi < phi && phi < pi - lo;
}

namespace {

// Antiderivative piece: integral over (0, beta) of sin^2.
double sin_sq_integral(double beta) { return 0.5 * beta - 0.25 * std::sin(2.0 * beta); }

}  // namespace

WeissParts weiss_closed_form(const GlobalSolution& sol, PhaseConvention convention) {
  const double pi = std::atan2(0.0, -1.0);
  const double g2 = 1.0 + sol.gamma * sol.gamma;
  const double ap2 = sol.alpha_plus * sol.alpha_plus;
  const double am2 = sol.alpha_minus * sol.alpha_minus;
  const double beta_pos = sol.positive_sector_angle();

  WeissParts w;
  w.lambda = sol.lambda_weight();
  // |grad v|^2 is constant on each phase sector; sector of angle beta has
  // area beta/2 in the unit disc.
  w.dirichlet = 0.5 * g2 * (ap2 * beta_pos + am2 * (pi - beta_pos));
  // On the unit arc v = sqrt(1+gamma^2) * (alpha_plus s^+ + alpha_minus s^-)
  // with s = sin(beta_pos - phi), so v^2 integrates via sin^2 pieces.
  w.sphere = g2 * (ap2 * sin_sq_integral(beta_pos) + am2 * sin_sq_integral(pi - beta_pos));
  switch (convention) {
    case PhaseConvention::ExactSector:
      w.phase_area = 0.5 * beta_pos;
      break;
    case PhaseConvention::CommonSector:
      w.phase_area = 0.5 * (0.5 * pi + sol.theta());
      break;
  }
  return w;
}

}  // namespace fblab
