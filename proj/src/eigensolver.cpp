#include "cuspeig/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "cuspeig/errors.hpp"

namespace cuspeig {
namespace {

using Triplet = Eigen::Triplet<double>;

double default_eps(const FunctionSpace& space, double p, double requested) {
  if (p >= 2.0) return 0.0;
  return requested > 0.0 ? requested : 1e-10 * space.mesh().extent();
}

// Removes the component along the node-measure functional: the Euclidean
// representative of a functional restricted to zero-mean test functions.
Vector restrict_to_zero_mean_tests(const FunctionSpace& space, const VectorRef& r) {
  const Vector& m = space.node_measure();
  return r - (m.dot(r) / m.squaredNorm()) * m;
}

Vector subtract_mean(const FunctionSpace& space, const VectorRef& v) {
  return v.array() - space.node_measure().dot(v) / space.volume();
}

Eigen::Index pin_node(const FunctionSpace& space) {
  Eigen::Index idx = 0;
  space.node_measure().maxCoeff(&idx);
  return idx;
}

// Sparse LDLT of a singular-on-constants SPD operator with one node pinned to
// zero; the pattern is analyzed once and refactorized on demand.
class PinnedSolver {
 public:
  PinnedSolver(Eigen::Index size, Eigen::Index pinned) : size_(size), pinned_(pinned) {}

  void factorize(std::vector<Triplet> entries) {
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [&](const Triplet& t) {
                                   return t.row() == pinned_ || t.col() == pinned_;
                                 }),
                  entries.end());
    entries.emplace_back(pinned_, pinned_, 1.0);
    SparseMatrix a(size_, size_);
    a.setFromTriplets(entries.begin(), entries.end());
    if (!analyzed_) {
      solver_.analyzePattern(a);
      analyzed_ = true;
    }
    solver_.factorize(a);
    if (solver_.info() != Eigen::Success) throw NumericalError("sparse factorization failed");
  }

  Vector solve(Vector rhs) const {
    rhs(pinned_) = 0.0;
    Vector x = solver_.solve(rhs);
    x(pinned_) = 0.0;
    return x;
  }

 private:
  Eigen::Index size_;
  Eigen::Index pinned_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

std::vector<Triplet> matrix_triplets(const SparseMatrix& a) {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) out.emplace_back(it.row(), it.col(), it.value());
  }
  return out;
}

// Hessian of (1/p) sum vol (|g|^2 + eps^2)^{p/2}.
std::vector<Triplet> p_energy_hessian(const FunctionSpace& space, const VectorRef& v, double p,
                                      double eps) {
  const int d = space.dimension();
  const auto& cells = space.mesh().cells();
  const auto& vol = space.mesh().cell_volumes();
  const Eigen::MatrixXd grads = space.cell_gradients(v);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(grads.cols() * (d + 1) * (d + 1)));
  Eigen::MatrixXd h(d, d);
  for (Eigen::Index c = 0; c < grads.cols(); ++c) {
    const auto g = grads.col(c);
    const double s = g.squaredNorm() + eps * eps;
    const double w = std::pow(s, 0.5 * (p - 2.0));
    h = w * Eigen::MatrixXd::Identity(d, d) + (p - 2.0) * (w / s) * (g * g.transpose());
    const auto grad_op = space.gradient_operator(c);
    const Eigen::MatrixXd local = vol(c) * (grad_op.transpose() * h * grad_op);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) entries.emplace_back(cells(c, i), cells(c, j), local(i, j));
  }
  return entries;
}

// sum vol c G^T G with c = |g|^{p-2} frozen at w, clamped to within a factor
// 10 of its value at the rms gradient so the factorization stays definite.
std::vector<Triplet> frozen_coefficient_matrix(const FunctionSpace& space, const VectorRef& w,
                                               double p, double rms) {
  const int d = space.dimension();
  const auto& cells = space.mesh().cells();
  const auto& vol = space.mesh().cell_volumes();
  const Eigen::MatrixXd grads = space.cell_gradients(w);
  const double typical = std::pow(rms, p - 2.0);
  const double lo = 1e-1 * typical;
  const double hi = 1e1 * typical;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(grads.cols() * (d + 1) * (d + 1)));
  for (Eigen::Index c = 0; c < grads.cols(); ++c) {
    const double coefficient =
        std::clamp(std::pow(grads.col(c).squaredNorm(), 0.5 * (p - 2.0)), lo, hi);
    const double weight = vol(c) * coefficient;
    const auto g = space.gradient_operator(c);
    const Eigen::MatrixXd local = weight * (g.transpose() * g);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) entries.emplace_back(cells(c, i), cells(c, j), local(i, j));
  }
  return entries;
}

double rms_gradient(const FunctionSpace& space, const VectorRef& v) {
  const Eigen::MatrixXd grads = space.cell_gradients(v);
  const auto& vol = space.mesh().cell_volumes();
  double sum = 0.0;
  for (Eigen::Index c = 0; c < grads.cols(); ++c) sum += vol(c) * grads.col(c).squaredNorm();
  return std::sqrt(sum / space.volume());
}

std::string describe(const char* what, int iterations, double residual) {
  std::ostringstream os;
  os << what << " after " << iterations << " iterations (residual " << residual << ")";
  return os.str();
}

}  // namespace

PLaplaceResult solve_p_laplace_source(const FunctionSpace& space, double p, const VectorRef& f,
                                      const PLaplaceOptions& options) {
  return solve_p_laplace_source(space, p, f, options, Vector());
}

PLaplaceResult solve_p_laplace_source(const FunctionSpace& space, double p, const VectorRef& f,
                                      const PLaplaceOptions& options, const VectorRef& guess) {
  if (!(p > 1.0)) throw DomainError("p-Laplace problem requires p > 1");
  if (f.size() != space.size()) throw DomainError("source size does not match the mesh");
  const Vector b = space.mass() * f;
  const double mean = space.node_measure().dot(f);
  const double scale = space.node_measure().dot(f.cwiseAbs());
  if (std::abs(mean) > 1e-10 * std::max(scale, 1e-300)) {
    throw DomainError("incompatible Neumann source: the source must have zero mean");
  }
  PLaplaceResult result;
  result.solution = Vector::Zero(space.size());
  const double b_norm = restrict_to_zero_mean_tests(space, b).norm();
  if (b_norm == 0.0) return result;

  if (guess.size() != 0 && guess.size() != space.size()) {
    throw DomainError("initial guess size does not match the mesh");
  }
  PinnedSolver solver(space.size(), pin_node(space));
  const bool warm = guess.size() != 0 && p != 2.0;
  Vector v;
  if (warm) {
    v = subtract_mean(space, guess);
  } else {
    solver.factorize(matrix_triplets(space.stiffness()));
    v = subtract_mean(space, solver.solve(b));
  }

  // Start from the best multiple of the starting field.
  const double eps = default_eps(space, p, options.eps);
  if (p != 2.0) {
    const double g = grad_norm_p(space, v, p, eps);
    const double bv = b.dot(v);
    if (g > 0.0 && bv > 0.0) v *= std::pow(bv / g, 1.0 / (p - 1.0));
  }
  // For p < 2 the curvature near vanishing cell gradients is of order
  // eps^{p-2}, which stalls Newton. Continue in eps, a decade at a time.
  double stage_eps = p < 2.0 ? std::max(eps, 1e-2 * rms_gradient(space, v)) : eps;
  const auto energy = [&](const VectorRef& x) {
    return grad_norm_p(space, x, p, stage_eps) / p - b.dot(x);
  };
  // A(v) - b annihilates constants already, which the pinned solve needs.
  const auto gradient = [&](const VectorRef& x) -> Vector {
    return p_laplace_operator(space, x, p, stage_eps) - b;
  };

  // Stop on the Newton decrement -grad . step relative to the work term b.v:
  // unlike the residual vector, it is insensitive to the stiff tip cells.
  const double target = options.tol * options.tol;
  Vector grad = gradient(v);
  double decrement = std::numeric_limits<double>::infinity();
  int iter = 0;
  bool converged = false;
  bool at_roundoff = false;
  for (; iter < options.max_iter; ++iter) {
    if (iter > 0 || p != 2.0 || warm) solver.factorize(p_energy_hessian(space, v, p, stage_eps));
    Vector step = subtract_mean(space, solver.solve(-grad));
    double slope = grad.dot(step);
    if (!(slope < 0.0)) {
      step = -grad;
      slope = -grad.squaredNorm();
    }
    decrement = -slope / std::max(std::abs(b.dot(v)), std::numeric_limits<double>::min());
    const bool final_stage = stage_eps <= eps;
    // Once the energy no longer resolves the step, the decrement has a
    // round-off floor a little above tol^2.
    const double final_target = at_roundoff ? 1e4 * target : target;
    if (decrement <= (final_stage ? final_target : std::max(target, 1e-16))) {
      if (final_stage) {
        converged = true;
        break;
      }
      stage_eps = std::max(eps, 0.1 * stage_eps);
      grad = gradient(v);
      continue;
    }
    const double e0 = energy(v);
    double t = 1.0;
    bool accepted = false;
    at_roundoff = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Vector trial = v + t * step;
      const double e1 = energy(trial);
      if (e1 <= e0 + 1e-4 * t * slope) {
        accepted = true;
      } else if (std::abs(e1 - e0) <= 1e-13 * std::max(std::abs(e0), 1e-300)) {
        // Energy differences are at round-off; fall back to the residual.
        at_roundoff = true;
        accepted = gradient(trial).norm() < grad.norm();
      }
      if (accepted) {
        v = trial;
        break;
      }
    }
    if (!accepted) break;
    grad = gradient(v);
  }
  result.solution = subtract_mean(space, v);
  result.residual = restrict_to_zero_mean_tests(space, gradient(result.solution)).norm() / b_norm;
  result.decrement = decrement;
  result.iterations = iter;
  if (!converged) {
    throw NumericalError(describe("p-Laplace inner solve did not converge", iter, decrement));
  }
  return result;
}

double check_weak_residual(const FunctionSpace& space, const VectorRef& u, double lambda, double p,
                           double q) {
  const Vector lhs = p_laplace_operator(space, u, p);
  const double norm_q = lq_norm(space, u, q);
  const Vector rhs = lambda * std::pow(norm_q, p - q) * lq_duality_map(space, u, q);
  const double denom = restrict_to_zero_mean_tests(space, lhs).norm();
  if (denom == 0.0) return restrict_to_zero_mean_tests(space, rhs).norm() == 0.0 ? 0.0 : 1.0;
  return restrict_to_zero_mean_tests(space, lhs - rhs).norm() / denom;
}

Vector normalize_sign(Vector u) {
  Eigen::Index idx = 0;
  u.cwiseAbs().maxCoeff(&idx);
  if (u(idx) < 0.0) u = -u;
  return u;
}

Vector default_initial_guess(const FunctionSpace& space, double q) {
  const int n = space.dimension();
  Vector u = project_zero_mean(space, space.mesh().nodes().col(n - 1), q);
  return u / lq_norm(space, u, q);
}

namespace {

EigenPair finish_pair(const FunctionSpace& space, Vector u, double p, double q, double eps,
                      int iterations, std::string method) {
  EigenPair pair;
  u = normalize_sign(std::move(u));
  pair.lambda = rayleigh_quotient(space, u, p, q);
  pair.lambda_regularized =
      eps > 0.0 ? grad_norm_p(space, u, p, eps) / std::pow(lq_norm(space, u, q), p) : pair.lambda;
  pair.weak_residual = check_weak_residual(space, u, pair.lambda, p, q);
  pair.constraint_residual = std::abs(constraint_value(space, u, q));
  pair.iterations = iterations;
  pair.method = std::move(method);
  pair.u = space.field(std::move(u));
  return pair;
}

}  // namespace

InverseIterationResult inverse_iteration(const FunctionSpace& space, double p, const VectorRef& w0,
                                         const InverseIterationOptions& options) {
  if (!(p > 1.0)) throw DomainError("inverse iteration requires p > 1");
  if (w0.size() != space.size()) throw DomainError("initial guess size does not match the mesh");
  Vector w = project_zero_mean(space, w0, 2.0);
  w /= lq_norm(space, w, 2.0);

  InverseIterationResult result;
  const double eps = default_eps(space, p, options.inner.eps);
  double mu_prev = 0.0;
  int stable = 0;
  bool converged = false;
  for (int n = 0; n < options.max_iter; ++n) {
    // Near the fixed point z = mu^{-1/(p-1)} w_n, which seeds the inner solve.
    const PLaplaceResult inner =
        n == 0 ? solve_p_laplace_source(space, p, w, options.inner)
               : solve_p_laplace_source(space, p, w, options.inner,
                                        Vector(std::pow(mu_prev, -1.0 / (p - 1.0)) * w));
    const double norm = lq_norm(space, inner.solution, 2.0);
    if (!(norm > 0.0)) throw NumericalError("inverse iteration produced a zero iterate");
    // A(z) = w_n and A is (p-1)-homogeneous, so w_{n+1} = z / ||z|| solves
    // A(w_{n+1}) = ||z||^{1-p} w_n.
    Vector next = subtract_mean(space, inner.solution) / norm;
    IterationState state;
    state.n = n;
    state.mu = std::pow(norm, 1.0 - p);
    state.energy = grad_norm_p(space, next, p, eps);
    state.constraint_residual = std::abs(space.node_measure().dot(next));
    state.weak_residual = check_weak_residual(space, next, rayleigh_quotient(space, next, p, 2.0), p, 2.0);
    result.trace.push_back(state);

    w = std::move(next);
    if (n > 0 && std::abs(state.mu - mu_prev) <= options.tol * state.mu) {
      ++stable;
    } else {
      stable = 0;
    }
    mu_prev = state.mu;
    if (stable >= options.stable_steps && state.weak_residual <= options.residual_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError(describe("inverse iteration did not converge", options.max_iter,
                                  result.trace.empty() ? 0.0 : result.trace.back().weak_residual));
  }
  result.mu = result.trace.back().mu;
  result.pair = finish_pair(space, std::move(w), p, 2.0, eps, static_cast<int>(result.trace.size()),
                            "iterate");
  return result;
}

EigenPair minimize_rayleigh(const FunctionSpace& space, double p, double q, const VectorRef& u0,
                            const RayleighOptions& options) {
  if (!(p > 1.0) || !(q > 1.0)) throw DomainError("Rayleigh minimization requires p, q > 1");
  if (u0.size() != space.size()) throw DomainError("initial guess size does not match the mesh");
  const double eps = default_eps(space, p, options.eps);

  const auto normalize = [&](const VectorRef& v, double* norm_out = nullptr) {
    Vector w = project_zero_mean(space, v, q);
    const double norm = lq_norm(space, w, q);
    if (!(norm > 0.0)) throw NumericalError("Rayleigh descent collapsed to a constant");
    if (norm_out) *norm_out = norm;
    return Vector(w / norm);
  };
  // Gradient of R at a normalized admissible field.
  struct Eval {
    double value;
    Vector flux;
    Vector gradient;
  };
  const auto evaluate = [&](const VectorRef& w) {
    Eval e;
    e.value = grad_norm_p(space, w, p, eps);
    e.flux = p_laplace_operator(space, w, p, eps);
    e.gradient = p * (e.flux - e.value * lq_duality_map(space, w, q));
    return e;
  };
  const auto residual_of = [&](const Eval& e) {
    const double denom = restrict_to_zero_mean_tests(space, e.flux).norm();
    return denom > 0.0 ? restrict_to_zero_mean_tests(space, e.gradient).norm() / (p * denom) : 1.0;
  };

  Vector u = normalize(u0);
  Eval current = evaluate(u);

  // Preconditioner: the frozen-coefficient p-Laplacian at u (the stiffness
  // matrix for p = 2) plus a tiny multiple of M, refreshed at every restart.
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool analyzed = false;
  const auto refresh_preconditioner = [&](const VectorRef& w, double value) {
    SparseMatrix precond;
    if (p == 2.0) {
      precond = space.stiffness();
    } else {
      std::vector<Triplet> entries = frozen_coefficient_matrix(space, w, p, rms_gradient(space, w));
      precond.resize(space.size(), space.size());
      precond.setFromTriplets(entries.begin(), entries.end());
    }
    // A small shift only to make the factorization definite. A shift near R
    // turns it into a mass-matrix gradient when R is far above lambda.
    precond += 1e-6 * std::max(value, 1e-12) * space.mass();
    if (!analyzed) {
      ldlt.analyzePattern(precond);
      analyzed = true;
    }
    ldlt.factorize(precond);
    if (ldlt.info() != Eigen::Success) throw NumericalError("preconditioner factorization failed");
  };
  refresh_preconditioner(u, current.value);

  Vector z_prev, g_prev, d_prev;
  double step = 0.5;
  double residual = residual_of(current);
  bool force_restart = false;
  // Round-off floor detection: give up after 50 restart cycles without halving.
  double benchmark = residual;
  int last_progress = 0;
  int iter = 0;
  for (; iter < options.max_iter && residual > options.tol; ++iter) {
    if (residual <= 0.5 * benchmark) {
      benchmark = residual;
      last_progress = iter;
    } else if (iter - last_progress > 50 * options.restart) {
      break;
    }
    const bool restart = iter % options.restart == 0 || force_restart || z_prev.size() == 0;
    if (iter > 0 && iter % options.restart == 0) refresh_preconditioner(u, current.value);
    const Vector& g = current.gradient;
    Vector z = subtract_mean(space, ldlt.solve(g));
    Vector d = -z;
    if (!restart) {
      const double beta = std::max(0.0, z.dot(g - g_prev) / z_prev.dot(g_prev));
      d += beta * d_prev;
      if (d.dot(g) >= 0.0) d = -z;
    }
    // Drop the component along u (J_q(u) . u = 1). Otherwise u + t d sweeps
    // only part of the arc and the minimum along it may sit at t = infinity.
    d -= lq_duality_map(space, u, q).dot(d) * u;
    // Search along the unit-norm direction so t reads roughly as tan(angle).
    const double d_norm = lq_norm(space, d, q);
    if (!(d_norm > 0.0)) break;
    const Vector dir = d / d_norm;
    const double slope0 = g.dot(dir);
    if (!(slope0 < 0.0)) break;

    // Directional derivative of R(u + t d) after re-projection; the constant
    // shift does not change R, and the gradient annihilates constants. Every
    // evaluation is a candidate: the curve can pass near the zero field, where
    // R is singular, so only a decrease of R is accepted.
    Vector w_best = u;
    Eval e_best = current;
    double t_best = 0.0;
    const auto slope_at = [&](double t, Vector& w_out, Eval& e_out) {
      double norm = 1.0;
      w_out = normalize(u + t * dir, &norm);
      e_out = evaluate(w_out);
      if (e_out.value < e_best.value) {
        w_best = w_out;
        e_best = e_out;
        t_best = t;
      }
      // R is homogeneous of degree 0, so its gradient scales like 1 / norm.
      return e_out.gradient.dot(dir) / norm;
    };

    Vector w_lo = u, w_hi, w_t;
    Eval e_lo = current, e_hi, e_t;
    double t_lo = 0.0, s_lo = slope0;
    double t_hi = step, s_hi = slope_at(t_hi, w_hi, e_hi);
    int expand = 0;
    const double ceiling = current.value * (1.0 + 1e-12);
    while (s_hi < 0.0 && e_hi.value <= ceiling && expand < 40) {
      t_lo = t_hi; s_lo = s_hi; w_lo = w_hi; e_lo = e_hi;
      t_hi *= 2.0;
      s_hi = slope_at(t_hi, w_hi, e_hi);
      ++expand;
    }
    bool have_root = false;
    double t_root = 0.0;
    if (s_hi >= 0.0) {
      // Illinois regula falsi on the derivative sign change.
      have_root = true;
      int side = 0;
      for (int k = 0; k < 40; ++k) {
        const double t = (t_lo * s_hi - t_hi * s_lo) / (s_hi - s_lo);
        const double s = slope_at(t, w_t, e_t);
        t_root = t;
        if (s < 0.0) {
          t_lo = t; s_lo = s; w_lo = w_t; e_lo = e_t;
          if (side == -1) s_hi *= 0.5;
          side = -1;
        } else {
          t_hi = t; s_hi = s; w_hi = w_t; e_hi = e_t;
          if (side == 1) s_lo *= 0.5;
          side = 1;
        }
        if (std::abs(s) <= 0.1 * std::abs(slope0)) break;
      }
    }
    // The root is taken unless R rose beyond round-off (a singular crossing).
    if (have_root && t_root > 0.0 && e_t.value <= ceiling) {
      w_best = w_t;
      e_best = e_t;
      t_best = t_root;
    } else if (t_best == 0.0 && t_lo > 0.0 && e_lo.value <= ceiling) {
      w_best = w_lo;
      e_best = e_lo;
      t_best = t_lo;
    }
    // Backtrack when the bracket gave no decrease.
    for (double t = 0.5 * t_hi; t_best == 0.0 && t > 1e-12 * step; t *= 0.5) slope_at(t, w_t, e_t);
    if (t_best == 0.0) {
      if (restart) break;
      force_restart = true;
      continue;
    }
    force_restart = false;
    step = t_best;
    z_prev = std::move(z);
    g_prev = current.gradient;
    d_prev = std::move(d);
    u = std::move(w_best);
    current = std::move(e_best);
    residual = residual_of(current);
  }
  if (residual > options.tol) {
    throw NumericalError(describe("Rayleigh descent stagnated above tolerance", iter, residual));
  }
  return finish_pair(space, std::move(u), p, q, eps, iter, "minimize");
}

std::vector<EigenPair> minimize_rayleigh_multistart(const FunctionSpace& space, double p, double q,
                                                    int seeds, const RayleighOptions& options) {
  const Vector base = default_initial_guess(space, q);
  const double amplitude = 0.5 * base.cwiseAbs().maxCoeff();
  std::vector<EigenPair> out;
  out.push_back(minimize_rayleigh(space, p, q, base, options));
  for (int seed = 1; seed <= seeds; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector u0 = base;
    for (Eigen::Index i = 0; i < u0.size(); ++i) u0(i) += amplitude * dist(rng);
    out.push_back(minimize_rayleigh(space, p, q, u0, options));
  }
  return out;
}

}  // namespace cuspeig
