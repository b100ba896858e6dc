#include "alam/selftest.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "alam/rl/trainer.hpp"
#include "alam/toy/convex.hpp"

namespace alam::selftest {

using nn::Mat;
using nn::ParamBlock;
using nn::RowVec;
using nn::Tape;
using nn::Var;
using nn::Vec;

Mat finite_difference_gradient(const std::function<double()>& f, ParamBlock& block,
                               double step) {
  Mat g(block.value.rows(), block.value.cols());
  for (Eigen::Index j = 0; j < block.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.value.rows(); ++i) {
      const double saved = block.value(i, j);
      block.value(i, j) = saved + step;
      const double hi = f();
      block.value(i, j) = saved - step;
      const double lo = f();
      block.value(i, j) = saved;
      g(i, j) = (hi - lo) / (2.0 * step);
    }
  }
  return g;
}

double gradient_discrepancy(const Mat& analytic, const Mat& fd) {
  // max-norm error relative to the gradient scale; the floor lets exact-zero
  // gradients (stop-gradient paths) pass against finite-difference noise
  const double scale =
      std::max({analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff(), 1e-6});
  return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

namespace {

constexpr double kGradTol = 1e-4;

Mat random_mat(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

CheckResult grad_result(const std::string& name, double worst) {
  CheckResult r;
  r.name = name;
  r.pass = worst <= kGradTol;
  std::ostringstream os;
  os << "max relative gradient error " << worst;
  r.detail = os.str();
  return r;
}

/// FD over every block of a network against one analytic backward.
double compare_net_gradient(Tape& tape, nn::Mlp& net, const std::function<double()>& eval) {
  double worst = 0.0;
  for (auto& block : net.blocks()) {
    const Mat analytic = tape.grad_of(block);
    const Mat fd = finite_difference_gradient(eval, block);
    worst = std::max(worst, gradient_discrepancy(analytic, fd));
  }
  return worst;
}

struct SmallSetup {
  int state_dim = 3;
  int action_dim = 2;
  int batch = 8;
  int k_samples = 3;
  std::vector<int> hidden = {8, 8};

  rl::PolicyHead policy;
  rl::CriticEnsemble critics;
  Mat states, actions, next_states;
  rl::TrainBatch batch_data;

  SmallSetup(std::mt19937_64& rng)
      : policy(state_dim, hidden, Vec::Constant(action_dim, -1.5),
               Vec::Constant(action_dim, 1.5), rng),
        critics(state_dim, action_dim, hidden, rng) {
    states = random_mat(state_dim, batch, rng);
    actions = random_mat(action_dim, batch, rng, 0.5);
    next_states = random_mat(state_dim, batch, rng);
    batch_data.states = states;
    batch_data.actions = actions;
    batch_data.next_states = next_states;
    batch_data.rewards = random_mat(1, batch, rng).row(0);
    batch_data.costs = Mat::Zero(1, batch).row(0);
    RowVec cs(batch);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < batch; ++j) cs(j) = u(rng) < 0.4 ? 1.0 : 0.0;
    batch_data.costs_at_state = cs;
  }

  Mat critic_inputs() const {
    Mat x(state_dim + action_dim, batch);
    x.topRows(state_dim) = states;
    x.bottomRows(action_dim) = actions;
    return x;
  }
};

}  // namespace

std::vector<CheckResult> check_forward_reevaluation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;

  for (auto output_map : {nn::OutputMap::kIdentity, nn::OutputMap::kSoftplus}) {
    nn::Mlp net(nn::MlpConfig{2, 1, {16, 16}, output_map}, rng);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Vec x = random_mat(2, 1, rng).col(0);
      // straight-line re-evaluation with explicit loops
      std::vector<double> h(x.data(), x.data() + x.size());
      const auto& blocks = net.blocks();
      const size_t layers = blocks.size() / 2;
      for (size_t l = 0; l < layers; ++l) {
        const Mat& w = blocks[2 * l].value;
        const Mat& b = blocks[2 * l + 1].value;
        std::vector<double> z(w.rows(), 0.0);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          double acc = b(i, 0);
          for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * h[j];
          z[i] = l + 1 < layers ? std::max(acc, 0.0) : acc;
        }
        h = std::move(z);
      }
      double naive = h[0];
      if (output_map == nn::OutputMap::kSoftplus)
        naive = std::max(naive, 0.0) + std::log1p(std::exp(-std::abs(naive)));
      const double got = net.forward(x)(0);
      worst = std::max(worst, std::abs(got - naive) /
                                  std::max(1.0, std::max(std::abs(got), std::abs(naive))));
    }
    CheckResult r;
    r.name = std::string("forward re-evaluation (") + nn::output_map_name(output_map) + ")";
    r.pass = worst < 1e-12;
    r.detail = "max relative deviation " + std::to_string(worst);
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> check_gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  const int reps = 5;
  Tape tape;

  // L_Q and L_Qc: mse of a critic against fixed targets
  for (const char* which : {"L_Q", "L_Qc"}) {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      SmallSetup s(rng);
      nn::Mlp& critic = std::string(which) == "L_Q" ? s.critics.q1 : s.critics.qc1;
      const Mat x = s.critic_inputs();
      const RowVec y = random_mat(1, s.batch, rng).row(0);
      auto eval = [&]() {
        Tape t;
        return t.backward(rl::critic_mse(t, critic, x, y));
      };
      tape.reset();
      tape.backward(rl::critic_mse(tape, critic, x, y));
      worst = std::max(worst, compare_net_gradient(tape, critic, eval));
    }
    out.push_back(grad_result(std::string(which) + " gradient vs finite differences", worst));
  }

  // L_pi: the full policy loss with the augmented penalty terms
  {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      SmallSetup s(rng);
      rl::AgentConfig cfg;
      cfg.hidden = s.hidden;
      cfg.mc_samples = s.k_samples;
      std::mt19937_64 strat_rng(seed + rep);
      auto strategy =
          rl::make_safety_strategy(rl::AgentKind::kSacAlam, s.state_dim, cfg, strat_rng);
      // make the multiplier nonuniform so both max branches occur
      {
        std::mt19937_64 r2(seed + 91 * rep);
        for (auto& b : strategy->multiplier()->net().blocks())
          b.value += 0.3 * random_mat(static_cast<int>(b.value.rows()),
                                      static_cast<int>(b.value.cols()), r2);
      }
      const double alpha = 0.2;
      const Mat eps_pi = random_mat(s.action_dim, s.batch, rng);
      const Mat eps_f = random_mat(s.action_dim, s.batch * s.k_samples, rng);

      auto build = [&](Tape& t) {
        rl::RowVec lp;
        Var obj = rl::sac_policy_objective(t, s.states, s.policy, s.critics, alpha, eps_pi, &lp);
        Var fhat = rl::feasibility_on_tape_with_eps(t, s.states, s.policy, s.critics,
                                                    s.k_samples, 0.1, eps_f);
        Var pen = strategy->policy_penalty(t, s.states, fhat);
        return t.add(obj, pen);
      };
      auto eval = [&]() {
        Tape t;
        return t.backward(build(t));
      };
      tape.reset();
      tape.backward(build(tape));
      worst = std::max(worst, compare_net_gradient(tape, s.policy.net(), eval));
    }
    out.push_back(grad_result("L_pi gradient vs finite differences", worst));
  }

  // L(alpha)
  {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      rl::Temperature temp(0.1 + 0.5 * rep, -2.0);
      const RowVec log_probs = random_mat(1, 16, rng).row(0);
      auto eval = [&]() {
        Tape t;
        return t.backward(rl::temperature_loss(t, temp, log_probs));
      };
      tape.reset();
      tape.backward(rl::temperature_loss(tape, temp, log_probs));
      const Mat analytic = tape.grad_of(temp.log_alpha);
      const Mat fd = finite_difference_gradient(eval, temp.log_alpha);
      worst = std::max(worst, gradient_discrepancy(analytic, fd));
    }
    out.push_back(grad_result("L_alpha gradient vs finite differences", worst));
  }

  // L_lambda: regression loss with the stop-gradient target frozen at the
  // base parameters
  {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      SmallSetup s(rng);
      std::mt19937_64 r2(seed + 7 * rep + 1);
      rl::MultiplierNet multiplier(s.state_dim, s.hidden, r2, 0.05);
      for (auto& b : multiplier.net().blocks())
        b.value += 0.3 * random_mat(static_cast<int>(b.value.rows()),
                                    static_cast<int>(b.value.cols()), r2);
      const double rho = 1.7;
      const RowVec fhat = random_mat(1, s.batch, rng).row(0);
      const RowVec target =
          (multiplier.values(s.states) + rho * fhat).cwiseMax(0.0);  // sg at base params

      auto build = [&](Tape& t) {
        Var lam = multiplier.forward(t, t.constant(s.states), true);
        return t.mean_all(t.square(t.sub(lam, t.constant(target))));
      };
      auto eval = [&]() {
        Tape t;
        return t.backward(build(t));
      };
      tape.reset();
      tape.backward(build(tape));
      worst = std::max(worst, compare_net_gradient(tape, multiplier.net(), eval));
    }
    out.push_back(grad_result("L_lambda gradient vs finite differences", worst));
  }

  // augmented toy objective
  {
    double worst = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      std::mt19937_64 prng(seed + 1000 + rep);
      toy::GeneratorOptions gopt;
      gopt.n_states = 6;
      const toy::ConvexToyProblem pb = toy::random_problem(gopt, prng);
      Vec lam = random_mat(pb.n_states(), 1, rng).col(0).cwiseAbs();
      const double rho = 0.5 + rep;
      ParamBlock u;
      u.name = "u";
      u.value = random_mat(pb.dim(), 1, rng, 0.8);

      const Vec analytic = toy::augmented_gradient(pb, u.value.col(0), lam, rho);
      auto eval = [&]() { return toy::augmented_objective(pb, u.value.col(0), lam, rho); };
      const Mat fd = finite_difference_gradient(eval, u);
      worst = std::max(worst, gradient_discrepancy(Mat(analytic), fd));
    }
    out.push_back(grad_result("augmented toy objective gradient vs finite differences", worst));
  }

  return out;
}

std::vector<CheckResult> check_slack_oracle(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ulam(0.0, 4.0), uf(-3.0, 3.0), urho(0.1, 5.0);

  const double grid_step = 1e-4;
  const int grid_points = 100001;  // p in [0, 10]
  double worst_gap = 0.0, worst_identity = 0.0;

  for (int trial = 0; trial < 1000; ++trial) {
    const double lam = ulam(rng), f = uf(rng), rho = urho(rng);
    const double closed = rl::slack(lam, f, rho);

    double best_p = 0.0, best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
      const double p = i * grid_step;
      const double v = lam * (f + p) + 0.5 * rho * (f + p) * (f + p);
      if (v < best_v) {
        best_v = v;
        best_p = p;
      }
    }
    worst_gap = std::max(worst_gap, std::abs(closed - best_p));

    const double identity_gap =
        std::abs(rl::dual_target(lam, f, rho) - (lam + rho * (f + closed)));
    worst_identity = std::max(worst_identity, identity_gap);
  }

  std::vector<CheckResult> out;
  {
    CheckResult r;
    r.name = "closed-form slack vs brute-force grid";
    r.pass = worst_gap <= grid_step + 1e-12;
    r.detail = "max |closed - grid| = " + std::to_string(worst_gap);
    out.push_back(r);
  }
  {
    CheckResult r;
    r.name = "dual target identity lambda + rho (F + slack)";
    r.pass = worst_identity <= 1e-12;
    std::ostringstream os;
    os << "max identity gap " << worst_identity;
    r.detail = os.str();
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> check_bellman_chain() {
  const double gamma = 0.99;
  const int n = 5;
  const int next[n] = {1, 2, 3, 4, 4};  // chain with an absorbing tail
  Vec c(n);
  c << 0.0, 1.0, 0.0, 1.0, 1.0;

  Mat p = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, next[i]) = 1.0;
  const Vec fixed_point = (Mat::Identity(n, n) - gamma * p).lu().solve(c);

  Vec f = fixed_point;
  for (int i = 0; i < n; ++i) f(i) += (i % 2 == 0 ? 1.0 : -1.0);  // ||F0 - F*||_inf = 1
  const int sweeps = static_cast<int>(std::ceil(std::log(1e-8) / std::log(gamma)));
  for (int s = 0; s < sweeps; ++s) {
    Vec f_next(n);
    for (int i = 0; i < n; ++i) f_next(i) = c(i) + gamma * f(next[i]);
    f = f_next;
  }
  const double err = (f - fixed_point).cwiseAbs().maxCoeff();

  CheckResult r;
  r.name = "cost Bellman operator gamma-contraction on 5-state chain";
  r.pass = err <= 1e-8;
  std::ostringstream os;
  os << "error after " << sweeps << " sweeps: " << err;
  r.detail = os.str();
  return {r};
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::vector<CheckResult> all;
  for (auto&& part : {check_forward_reevaluation(seed), check_gradient_suite(seed),
                      check_slack_oracle(seed), check_bellman_chain()})
    all.insert(all.end(), part.begin(), part.end());
  return all;
}

bool report(const std::vector<CheckResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %s — %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok;
}

}  // namespace alam::selftest
