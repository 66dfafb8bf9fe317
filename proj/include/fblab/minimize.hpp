#pragma once

#include <vector>

#include "fblab/functional.hpp"

namespace fblab {

// Controls for the two-stage minimization: a smoothed gradient-descent pass
// over a decreasing ramp-width schedule, then exact nodewise relaxation on
// the sharp functional.
struct SolveOptions {
  double lambda = 2.0;

  // Ramp widths for the smoothed stage; empty means the default schedule
  // h/2^k for k = 0..6 with h the coarse angular spacing of the mesh.
  std::vector<double> eps_schedule;
  int gd_iters = 120;    // descent iterations per ramp width
  double gd_tol = 1e-7;  // sup-norm gradient stop for the smoothed stage

  int polish_sweeps = 400;          // max nodewise relaxation sweeps
  unsigned sweep_shuffle_seed = 0;  // 0 keeps natural node order

  // Treat an energy decrease below this relative threshold as no change.
  double accept_rel_tol = 1e-14;
};

struct SolveResult {
  Field u;
  bool converged = false;  // a relaxation sweep completed with no accepted move
  int gd_iterations = 0;   // total smoothed-stage iterations
  int sweeps_used = 0;
  EnergyBreakdown parts;   // sharp energy terms of the final field
  double energy = 0.0;
};

// Solves the discrete Laplace problem with the given values fixed on all
// Dirichlet nodes (flat segment and arc); entries of `boundary` at interior
// nodes are ignored.
Field harmonic_lift(const FemCache& fem, const Field& boundary);

// Minimizes J(u) = integral |grad u|^2 + lambda |{u > 0}| over fields with
// the given Dirichlet values. Starts from `init` when provided (its Dirichlet
// entries are overwritten), otherwise from the harmonic lift. Deterministic
// for fixed options.
SolveResult minimize_energy(const FemCache& fem, const Field& boundary, const SolveOptions& opt,
                            const Field* init = nullptr);

// Nodal max/min envelopes of two fields on one mesh, with an audit of the
// exact energy identity J(max) + J(min) = J(a) + J(b): it holds triangle by
// triangle wherever a - b keeps one sign, so the global defect is supported
// on the listed sign-change triangles only.
struct CombineResult {
  Field max_field;
  Field min_field;
  double energy_defect = 0.0;   // |J(max) + J(min) - J(a) - J(b)|
  std::vector<int> mixed_tris;  // triangles where a - b takes both strict signs
};

CombineResult combine_fields(const FemCache& fem, const Field& a, const Field& b, double lambda);

// Result of the multi-start envelope construction below.
struct ExtremalResult {
  SolveResult best;         // re-polished nodal envelope of the runs
  double run_spread = 0.0;  // spread of the individual run energies
  // The converged runs disagreed in energy beyond 1e-7 * (1 + |E_min|):
  // the functional has several basins for this datum and the envelope picks
  // an ordered representative rather than a unique minimizer.
  bool multiple_basins = false;
};

// Runs the solver from several initial fields -- the matching one-homogeneous
// interpolant when the regime provides one, the harmonic lift, and zero --
// takes the nodal min (smallest) or max (largest) envelope of the converged
// runs, and re-polishes the envelope with the sharp relaxation stage alone.
ExtremalResult smallest_minimizer(const FemCache& fem, const ProblemSpec& spec,
                                  const Field& boundary, const SolveOptions& opt);
ExtremalResult largest_minimizer(const FemCache& fem, const ProblemSpec& spec,
                                 const Field& boundary, const SolveOptions& opt);

}  // namespace fblab
