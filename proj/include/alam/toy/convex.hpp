#pragma once

#include <Eigen/Core>

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace alam::toy {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Per-state constraint F_i(u) = 0.5 u'P u + a'u + c with P positive
/// semidefinite (P = 0 for affine constraints). Feasible means F_i(u) <= 0.
struct Constraint {
  Mat p;  // empty for affine
  Vec a;
  double c = 0.0;

  double value(const Vec& u) const;
  Vec gradient(const Vec& u) const;
  bool quadratic() const { return p.size() > 0; }
};

/// Finite constrained program standing in for the function-space problem:
/// maximize the concave quadratic J(u) = 0.5 u'Q u + b'u (Q negative
/// definite) over a box, subject to one convex constraint per state.
struct ConvexToyProblem {
  Mat q;
  Vec b;
  std::vector<Constraint> constraints;
  Vec lo, hi;
  Vec strictly_feasible;  // Slater point from the generator

  int dim() const { return static_cast<int>(b.size()); }
  int n_states() const { return static_cast<int>(constraints.size()); }

  double objective(const Vec& u) const;          // J(u)
  Vec objective_gradient(const Vec& u) const;    // grad J
  Vec constraint_values(const Vec& u) const;     // F(u)
  Vec project_box(const Vec& u) const;
};

/// Augmented objective in its completed-square form,
///   phi(u) = -J(u) + (1/2rho) (||max(0, lam + rho F(u))||^2 - ||lam||^2),
/// whose box-constrained minimizer is the ALaM primal update.
double augmented_objective(const ConvexToyProblem& pb, const Vec& u, const Vec& lam, double rho);
Vec augmented_gradient(const ConvexToyProblem& pb, const Vec& u, const Vec& lam, double rho);

struct PrimalResult {
  Vec u;
  int iterations = 0;
  double residual = 0.0;
};

/// Accelerated projected-gradient minimization of the augmented objective to
/// projected-gradient residual <= tol. Throws on hitting the iteration cap.
PrimalResult primal_solve(const ConvexToyProblem& pb, const Vec& lam, double rho, double tol,
                          std::optional<Vec> warm_start = std::nullopt,
                          int max_iterations = 200000);

struct AlamOptions {
  double rho0 = 1.0;
  double sigma = 1.01;
  double rho_max = 5.0;
  double primal_tol = 1e-8;
  double dual_tol = 1e-10;
  int max_outer = 10000;
};

struct AlamIterate {
  Vec u;
  Vec lam;
  double rho = 1.0;
  double violation = 0.0;        // v_k after the primal step
  double dual_step_norm = 0.0;   // ||lam_{k+1} - lam_k||
};

/// One exact primal-dual-penalty cycle:
///   u    <- argmin_u phi(u; lam, rho)
///   lam  <- max(0, lam + rho F(u))
///   rho  <- min(sigma rho, rho_max) if v > 1/rho.
AlamIterate alam_iterate(const ConvexToyProblem& pb, const AlamIterate& it,
                         const AlamOptions& opt);

struct AlamTrace {
  std::vector<AlamIterate> iterates;  // iterates[0] is the initial point
  bool converged = false;
};

/// Runs cycles until the dual step stalls below dual_tol. When csv_path is
/// given, writes per-iteration rows
///   k,dual_step_norm,violation_metric,rho,objective,max_violation.
AlamTrace solve_alam(const ConvexToyProblem& pb, const AlamOptions& opt,
                     const std::string& csv_path = {});

struct KktResidual {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max() const;
};

/// Residuals of the four KKT conditions at (u, lam); box handling via the
/// projected-stationarity measure ||u - P_box(u - grad_L)||_inf.
KktResidual kkt_residual(const ConvexToyProblem& pb, const Vec& u, const Vec& lam);

struct OracleSolution {
  Vec u;
  Vec lam;
};

/// Independent ground truth from a different method family: a log-barrier
/// interior-point solve with damped Newton inner iterations. Multipliers are
/// recovered as 1/(t * (-F_i(u))). Throws if the problem is infeasible.
OracleSolution oracle_solve(const ConvexToyProblem& pb);

struct GeneratorOptions {
  int n_states = 10;
  double quadratic_fraction = 0.3;  // remaining constraints are affine
  double box_half_width = 5.0;
};

/// Random well-conditioned instance with a built-in strictly feasible point
/// and an unconstrained optimum pushed outside the feasible set so some
/// constraints bind.
ConvexToyProblem random_problem(const GeneratorOptions& opt, std::mt19937_64& rng);

}  // namespace alam::toy
