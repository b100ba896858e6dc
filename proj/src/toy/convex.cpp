#include "alam/toy/convex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace alam::toy {

double Constraint::value(const Vec& u) const {
  double v = a.dot(u) + c;
  if (quadratic()) v += 0.5 * u.dot(p * u);
  return v;
}

Vec Constraint::gradient(const Vec& u) const {
  if (quadratic()) return p * u + a;
  return a;
}

double ConvexToyProblem::objective(const Vec& u) const { return 0.5 * u.dot(q * u) + b.dot(u); }

Vec ConvexToyProblem::objective_gradient(const Vec& u) const { return q * u + b; }

Vec ConvexToyProblem::constraint_values(const Vec& u) const {
  Vec f(n_states());
  for (int i = 0; i < n_states(); ++i) f(i) = constraints[i].value(u);
  return f;
}

Vec ConvexToyProblem::project_box(const Vec& u) const { return u.cwiseMax(lo).cwiseMin(hi); }

double augmented_objective(const ConvexToyProblem& pb, const Vec& u, const Vec& lam,
                           double rho) {
  if (rho <= 0.0) throw std::invalid_argument("augmented objective: rho must be > 0");
  const Vec y = (lam + rho * pb.constraint_values(u)).cwiseMax(0.0);
  return -pb.objective(u) + (y.squaredNorm() - lam.squaredNorm()) / (2.0 * rho);
}

Vec augmented_gradient(const ConvexToyProblem& pb, const Vec& u, const Vec& lam, double rho) {
  const Vec y = (lam + rho * pb.constraint_values(u)).cwiseMax(0.0);
  Vec g = -pb.objective_gradient(u);
  for (int i = 0; i < pb.n_states(); ++i)
    if (y(i) > 0.0) g += y(i) * pb.constraints[i].gradient(u);
  return g;
}

namespace {

double projected_residual(const ConvexToyProblem& pb, const Vec& u, const Vec& g) {
  return (u - pb.project_box(u - g)).cwiseAbs().maxCoeff();
}

}  // namespace

PrimalResult primal_solve(const ConvexToyProblem& pb, const Vec& lam, double rho, double tol,
                          std::optional<Vec> warm_start, int max_iterations) {
  if (tol <= 0.0) throw std::invalid_argument("primal_solve: tol must be > 0");
  Vec u = warm_start ? pb.project_box(*warm_start) : pb.project_box(pb.strictly_feasible);
  // FISTA with backtracking and the gradient-scheme restart (momentum reset
  // when it points uphill); no function-value comparisons, so progress does
  // not stall at the double-precision floor
  Vec z = u;
  double t_momentum = 1.0;
  double step = 1.0;

  for (int it = 0; it < max_iterations; ++it) {
    const Vec g_z = augmented_gradient(pb, z, lam, rho);
    const double f_z = augmented_objective(pb, z, lam, rho);

    Vec u_next;
    while (true) {
      u_next = pb.project_box(z - step * g_z);
      const Vec d = u_next - z;
      const double quad_bound = f_z + g_z.dot(d) + d.squaredNorm() / (2.0 * step);
      if (augmented_objective(pb, u_next, lam, rho) <= quad_bound + 1e-14) break;
      step *= 0.5;
      if (step < 1e-18) throw std::runtime_error("primal_solve: line search collapsed");
    }

    if ((z - u_next).dot(u_next - u) > 0.0) t_momentum = 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    z = u_next + ((t_momentum - 1.0) / t_next) * (u_next - u);
    u = u_next;
    t_momentum = t_next;
    step *= 1.3;

    const Vec g_u = augmented_gradient(pb, u, lam, rho);
    const double res = projected_residual(pb, u, g_u);
    if (res <= tol) return {u, it + 1, res};
  }
  const double res = projected_residual(pb, u, augmented_gradient(pb, u, lam, rho));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", res);
  throw std::runtime_error(std::string("primal_solve: no convergence, residual ") + buf);
}

AlamIterate alam_iterate(const ConvexToyProblem& pb, const AlamIterate& it,
                         const AlamOptions& opt) {
  AlamIterate next;
  const PrimalResult pr = primal_solve(pb, it.lam, it.rho, opt.primal_tol, it.u);
  next.u = pr.u;
  const Vec f = pb.constraint_values(next.u);
  next.lam = (it.lam + it.rho * f).cwiseMax(0.0);
  next.dual_step_norm = (next.lam - it.lam).norm();
  // counting measure over the finite state set
  next.violation = f.cwiseMax(-it.lam / it.rho).norm();
  next.rho = it.rho;
  if (next.violation > 1.0 / it.rho) next.rho = std::min(opt.sigma * it.rho, opt.rho_max);
  return next;
}

AlamTrace solve_alam(const ConvexToyProblem& pb, const AlamOptions& opt,
                     const std::string& csv_path) {
  AlamTrace trace;
  AlamIterate it;
  it.u = pb.project_box(pb.strictly_feasible);
  it.lam = Vec::Zero(pb.n_states());
  it.rho = opt.rho0;
  trace.iterates.push_back(it);

  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("solve_alam: cannot open " + csv_path);
    csv << "k,dual_step_norm,violation_metric,rho,objective,max_violation\n";
  }

  for (int k = 0; k < opt.max_outer; ++k) {
    AlamIterate next = alam_iterate(pb, it, opt);
    trace.iterates.push_back(next);
    if (csv) {
      const Vec f = pb.constraint_values(next.u);
      csv << k << ',' << next.dual_step_norm << ',' << next.violation << ',' << it.rho << ','
          << pb.objective(next.u) << ',' << f.maxCoeff() << '\n';
    }
    const bool stalled = next.dual_step_norm < opt.dual_tol;
    it = std::move(next);
    if (stalled) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

double KktResidual::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

KktResidual kkt_residual(const ConvexToyProblem& pb, const Vec& u, const Vec& lam) {
  KktResidual r;
  Vec g = -pb.objective_gradient(u);
  for (int i = 0; i < pb.n_states(); ++i) g += lam(i) * pb.constraints[i].gradient(u);
  r.stationarity = (u - pb.project_box(u - g)).cwiseAbs().maxCoeff();
  const Vec f = pb.constraint_values(u);
  const double box_violation =
      std::max((pb.lo - u).cwiseMax(0.0).maxCoeff(), (u - pb.hi).cwiseMax(0.0).maxCoeff());
  r.primal = std::max(f.cwiseMax(0.0).maxCoeff(), box_violation);
  r.dual = (-lam).cwiseMax(0.0).maxCoeff();
  r.complementarity = lam.cwiseProduct(f).cwiseAbs().maxCoeff();
  return r;
}

// ---------------------------------------------------------------- oracle

namespace {

struct BarrierEval {
  double value;
  Vec gradient;
  Mat hessian;
  bool feasible;
};

// normalized barrier f0 + (1/t) * phi keeps values O(1) for every t, so the
// Armijo comparisons stay meaningful at tight central-path accuracy
BarrierEval barrier_eval(const ConvexToyProblem& pb, const Vec& u, double t) {
  BarrierEval be;
  const int n = pb.dim();
  const double w = 1.0 / t;
  be.feasible = true;
  be.value = -pb.objective(u);
  be.gradient = -pb.objective_gradient(u);
  be.hessian = -pb.q;

  for (const Constraint& cst : pb.constraints) {
    const double f = cst.value(u);
    if (f >= 0.0) {
      be.feasible = false;
      return be;
    }
    const Vec cg = cst.gradient(u);
    be.value -= w * std::log(-f);
    be.gradient += w * cg / (-f);
    be.hessian += w * cg * cg.transpose() / (f * f);
    if (cst.quadratic()) be.hessian += w * cst.p / (-f);
  }
  for (int j = 0; j < n; ++j) {
    const double dl = u(j) - pb.lo(j);
    const double dh = pb.hi(j) - u(j);
    if (dl <= 0.0 || dh <= 0.0) {
      be.feasible = false;
      return be;
    }
    be.value -= w * (std::log(dl) + std::log(dh));
    be.gradient(j) += w * (-1.0 / dl + 1.0 / dh);
    be.hessian(j, j) += w * (1.0 / (dl * dl) + 1.0 / (dh * dh));
  }
  return be;
}

}  // namespace

OracleSolution oracle_solve(const ConvexToyProblem& pb) {
  Vec u = pb.project_box(pb.strictly_feasible);
  {
    const Vec f = pb.constraint_values(u);
    if (f.maxCoeff() >= 0.0)
      throw std::runtime_error("oracle_solve: stored point is not strictly feasible");
  }

  double t = 1.0;
  const double t_final = 1e9;

  while (true) {
    // damped Newton on the normalized barrier at this t
    for (int it = 0; it < 200; ++it) {
      const BarrierEval be = barrier_eval(pb, u, t);
      if (!be.feasible) throw std::runtime_error("oracle_solve: lost feasibility");
      const Vec dir = -be.hessian.ldlt().solve(be.gradient);
      const double decrement = -be.gradient.dot(dir);
      if (decrement < 1e-16) break;

      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 100; ++ls) {
        const Vec cand = u + step * dir;
        const BarrierEval ce = barrier_eval(pb, cand, t);
        if (ce.feasible && ce.value <= be.value - 0.25 * step * decrement) {
          u = cand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (t >= t_final) break;
    t = std::min(t * 10.0, t_final);
  }

  OracleSolution sol;
  sol.u = u;
  const Vec f = pb.constraint_values(u);
  sol.lam = Vec(pb.n_states());
  for (int i = 0; i < pb.n_states(); ++i) sol.lam(i) = 1.0 / (t * (-f(i)));

  // central-path multipliers identify the active set cleanly (inactive ones
  // sit at ~1/t); refine the active multipliers by solving the stationarity
  // system on the box-free coordinates
  std::vector<int> active;
  for (int i = 0; i < pb.n_states(); ++i)
    if (sol.lam(i) > 1e-6) active.push_back(i);
  std::vector<int> free_coords;
  for (int j = 0; j < pb.dim(); ++j)
    if (u(j) - pb.lo(j) > 1e-6 && pb.hi(j) - u(j) > 1e-6) free_coords.push_back(j);

  if (!active.empty() && free_coords.size() >= active.size()) {
    Mat m(free_coords.size(), active.size());
    Vec r(free_coords.size());
    const Vec g0 = -pb.objective_gradient(u);
    for (size_t ai = 0; ai < active.size(); ++ai) {
      const Vec cg = pb.constraints[active[ai]].gradient(u);
      for (size_t fi = 0; fi < free_coords.size(); ++fi) m(fi, ai) = cg(free_coords[fi]);
    }
    for (size_t fi = 0; fi < free_coords.size(); ++fi) r(fi) = g0(free_coords[fi]);
    const Vec lam_refined = m.colPivHouseholderQr().solve(-r).cwiseMax(0.0);
    Vec lam = Vec::Zero(pb.n_states());
    for (size_t ai = 0; ai < active.size(); ++ai) lam(active[ai]) = lam_refined(ai);
    // keep the refinement only if it actually improves the KKT residual
    if (kkt_residual(pb, u, lam).max() <= kkt_residual(pb, u, sol.lam).max()) sol.lam = lam;
  }
  return sol;
}

// ---------------------------------------------------------------- generator

ConvexToyProblem random_problem(const GeneratorOptions& opt, std::mt19937_64& rng) {
  const int n = opt.n_states;
  if (n < 1) throw std::invalid_argument("random_problem: need at least one state");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto random_orthogonal = [&](int d) {
    Mat g(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) g(i, j) = gauss(rng);
    return Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(d, d);
  };

  ConvexToyProblem pb;
  // concave objective with spectrum in [-10, -0.1]
  {
    const Mat rot = random_orthogonal(n);
    Vec eigs(n);
    for (int i = 0; i < n; ++i) eigs(i) = 0.1 + 9.9 * unit(rng);
    pb.q = -(rot * eigs.asDiagonal() * rot.transpose());
    pb.q = 0.5 * (pb.q + pb.q.transpose().eval());
  }

  pb.lo = Vec::Constant(n, -opt.box_half_width);
  pb.hi = Vec::Constant(n, opt.box_half_width);

  // Slater point well inside the box
  Vec u_sf(n);
  for (int i = 0; i < n; ++i) u_sf(i) = 0.5 * (2.0 * unit(rng) - 1.0);
  pb.strictly_feasible = u_sf;

  // push the unconstrained optimum away from the Slater point so that some
  // constraints end up active
  {
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir(i) = gauss(rng);
    dir.normalize();
    const Vec u_unc = u_sf + (1.0 + 2.0 * unit(rng)) * dir;
    pb.b = -pb.q * u_unc;
  }

  // constraint normals from a well-conditioned matrix (singular values in
  // [0.5, 2]) so the dual stays well-posed
  Mat a_rows;
  {
    const Mat q1 = random_orthogonal(n);
    const Mat q2 = random_orthogonal(n);
    Vec sv(n);
    for (int i = 0; i < n; ++i) sv(i) = 0.5 + 1.5 * unit(rng);
    a_rows = q1 * sv.asDiagonal() * q2.transpose();
  }

  for (int i = 0; i < n; ++i) {
    Constraint cst;
    cst.a = a_rows.row(i).transpose();
    const double margin = 0.05 + 0.25 * unit(rng);
    if (unit(rng) < opt.quadratic_fraction) {
      Vec w(n);
      for (int j = 0; j < n; ++j) w(j) = gauss(rng);
      w.normalize();
      cst.p = (0.2 + 0.8 * unit(rng)) * (w * w.transpose());
      cst.c = -(0.5 * u_sf.dot(cst.p * u_sf) + cst.a.dot(u_sf)) - margin;
    } else {
      cst.c = -cst.a.dot(u_sf) - margin;
    }
    pb.constraints.push_back(std::move(cst));
  }
  return pb;
}

}  // namespace alam::toy
