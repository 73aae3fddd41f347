#pragma once

#include <string>
#include <vector>

#include "cuspeig/discretization.hpp"

namespace cuspeig {

/// Computed (lambda, u) with u normalized to unit L^q norm, sign fixed so the
/// nodal value of largest magnitude is positive.
struct EigenPair {
  double lambda = 0.0;
  /// Rayleigh quotient with the gradient regularization switched on (equals
  /// lambda for p >= 2, where no regularization is applied).
  double lambda_regularized = 0.0;
  ScalarField u;
  double weak_residual = 0.0;
  double constraint_residual = 0.0;
  int iterations = 0;
  std::string method;
};

/// One step of the inverse iteration: w_{n+1}, its multiplier mu_n, and the
/// p-energy of w_{n+1}.
struct IterationState {
  int n = 0;
  double mu = 0.0;
  double energy = 0.0;
  double constraint_residual = 0.0;
  double weak_residual = 0.0;
};

struct PLaplaceOptions {
  /// Stop when the Newton decrement, relative to int f v, is below tol^2
  /// (so the energy-norm error of v is about tol relative).
  double tol = 1e-12;
  int max_iter = 200;
  /// Gradient regularization for p < 2; zero picks 1e-10 * mesh extent.
  double eps = 0.0;
};

struct PLaplaceResult {
  Vector solution;
  /// ||A(v) - M f|| / ||M f|| over zero-mean tests, for reporting.
  double residual = 0.0;
  double decrement = 0.0;
  int iterations = 0;
};

/// Zero-mean minimizer of (1/p) int |grad v|^p - int f v for a zero-mean
/// source f, i.e. the weak solution of -div(|grad v|^{p-2} grad v) = f with
/// natural boundary conditions. Damped Newton with Armijo backtracking.
/// Throws DomainError for an incompatible source, NumericalError when the
/// Newton decrement does not reach the tolerance.
PLaplaceResult solve_p_laplace_source(const FunctionSpace& space, double p, const VectorRef& f,
                                      const PLaplaceOptions& options = {});

/// Same, started from `guess` (rescaled by the best multiple) instead of the
/// p = 2 solution.
PLaplaceResult solve_p_laplace_source(const FunctionSpace& space, double p, const VectorRef& f,
                                      const PLaplaceOptions& options, const VectorRef& guess);

struct InverseIterationOptions {
  /// Relative change in mu_n, required on `stable_steps` consecutive steps.
  double tol = 1e-8;
  int stable_steps = 3;
  /// Weak residual required of the final pair.
  double residual_tol = 1e-6;
  int max_iter = 500;
  PLaplaceOptions inner;
};

struct InverseIterationResult {
  EigenPair pair;
  /// Limit of the multipliers mu_n.
  double mu = 0.0;
  std::vector<IterationState> trace;
};

/// Fixed-point iteration int |grad w_{n+1}|^{p-2} grad w_{n+1} . grad v
///   = mu_n int w_n v, ||w_n||_{L^2} = 1, with q = 2. The inner problem is
/// solved with unit source weight; mu_n follows from homogeneity.
InverseIterationResult inverse_iteration(const FunctionSpace& space, double p, const VectorRef& w0,
                                         const InverseIterationOptions& options = {});

struct RayleighOptions {
  /// Weak residual at which the descent stops.
  double tol = 1e-8;
  int max_iter = 20000;
  /// Gradient regularization for p < 2; zero picks 1e-10 * mesh extent.
  double eps = 0.0;
  /// Restart the conjugate direction and rebuild the preconditioner every
  /// this many steps.
  int restart = 20;
};

/// Preconditioned nonlinear conjugate-gradient descent on the Rayleigh
/// quotient over the zero-(q-1)-mean class, re-projecting and renormalizing
/// after every step. Throws NumericalError if the descent stagnates above tol.
EigenPair minimize_rayleigh(const FunctionSpace& space, double p, double q, const VectorRef& u0,
                            const RayleighOptions& options = {});

/// Runs minimize_rayleigh from the default guess and from `seeds` randomly
/// perturbed guesses; results are ordered by start, the caller picks.
std::vector<EigenPair> minimize_rayleigh_multistart(const FunctionSpace& space, double p, double q,
                                                    int seeds = 3,
                                                    const RayleighOptions& options = {});

/// || P (A(u) - lambda ||u||_q^{p-q} J_q(u)) || / || P A(u) || with J_q the
/// L^q duality map and P the projector onto test functions of zero mean.
double check_weak_residual(const FunctionSpace& space, const VectorRef& u, double lambda, double p,
                           double q);

/// x_n projected to the admissible class and normalized in L^q.
Vector default_initial_guess(const FunctionSpace& space, double q);

/// Flips sign so the entry of largest magnitude is positive.
Vector normalize_sign(Vector u);

}  // namespace cuspeig
