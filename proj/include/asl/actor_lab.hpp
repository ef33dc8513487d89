#pragma once

// Tabular softmax actor pi_theta(a | s, z) trained on the exact expected
// log-loss against the optimal action law, used to certify that actor NLL
// equals H(A|S,G) plus the conditional KL risk, and that the excess NLL
// upper-bounds the action-sufficiency gap at every iterate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "asl/errors.hpp"
#include "asl/info_metrics.hpp"
#include "asl/lab.hpp"

namespace asl {

/// Rows are the (s, z) groups of the pair law: weight = group mass, target =
/// P(A | s, z), the goal-marginalized optimal action law.
struct ActorProblem {
  std::size_t action_count = kActionCount;
  std::vector<double> weight;
  std::vector<double> target;            ///< rows x action_count
  std::vector<std::uint32_t> pair_row;   ///< row of each pair

  [[nodiscard]] std::size_t rows() const noexcept { return weight.size(); }
  [[nodiscard]] std::span<const double> target_of(std::size_t r) const noexcept {
    return {target.data() + r * action_count, action_count};
  }
};

inline ActorProblem make_actor_problem(const PairLaw& law, std::span<const std::uint32_t> z) {
  if (z.size() != law.size()) throw InvalidArgument("encoding count does not match pair count");
  ActorProblem p;
  p.action_count = law.action_count;
  p.pair_row.assign(law.size(), 0);
  std::vector<std::uint64_t> keys(z.begin(), z.end());
  const double n = static_cast<double>(law.size());
  detail::for_each_group(law, keys, [&](std::size_t b, std::size_t e, std::span<const std::size_t> order) {
    const auto r = static_cast<std::uint32_t>(p.weight.size());
    std::vector<double> q(law.action_count, 0.0);
    for (std::size_t k = b; k < e; ++k) {
      p.pair_row[order[k]] = r;
      const auto probs = law.probs_of(order[k]);
      for (std::size_t a = 0; a < law.action_count; ++a) q[a] += probs[a];
    }
    for (auto& x : q) x /= static_cast<double>(e - b);
    p.weight.push_back(static_cast<double>(e - b) / n);
    p.target.insert(p.target.end(), q.begin(), q.end());
  });
  return p;
}

class TabularActor {
 public:
  TabularActor(std::size_t rows, std::size_t actions) : actions_(actions), logits_(rows * actions, 0.0) {}

  /// Actor whose rows are the given distributions (zero entries give -inf logits).
  static TabularActor from_probabilities(std::span<const double> probs, std::size_t actions) {
    TabularActor actor(probs.size() / actions, actions);
    for (std::size_t i = 0; i < probs.size(); ++i)
      actor.logits_[i] = probs[i] > 0 ? std::log(probs[i]) : -std::numeric_limits<double>::infinity();
    return actor;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return logits_.size() / actions_; }
  [[nodiscard]] std::size_t actions() const noexcept { return actions_; }
  [[nodiscard]] std::span<double> logits(std::size_t r) noexcept { return {logits_.data() + r * actions_, actions_}; }
  [[nodiscard]] std::span<const double> logits(std::size_t r) const noexcept {
    return {logits_.data() + r * actions_, actions_};
  }

  /// log pi(. | row) into `out`.
  void log_probs(std::size_t r, std::span<double> out) const noexcept { log_softmax(logits(r), out); }

  [[nodiscard]] std::vector<double> probs(std::size_t r) const {
    std::vector<double> lp(actions_);
    log_probs(r, lp);
    for (auto& x : lp) x = std::exp(x);
    return lp;
  }

  static void log_softmax(std::span<const double> logits, std::span<double> out) noexcept {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logits) m = std::max(m, x);
    double z = 0;
    for (double x : logits) z += std::exp(x - m);
    const double lse = m + std::log(z);
    for (std::size_t a = 0; a < logits.size(); ++a) out[a] = logits[a] - lse;
  }

 private:
  std::size_t actions_;
  std::vector<double> logits_;
};

namespace detail {

/// -sum q log pi, with 0 log(.) = 0.
inline double cross_entropy(std::span<const double> q, std::span<const double> log_pi) {
  double ce = 0;
  for (std::size_t a = 0; a < q.size(); ++a)
    if (q[a] > 0) ce -= q[a] * log_pi[a];
  return ce;
}

inline double kl(std::span<const double> p, std::span<const double> log_q) {
  double d = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    if (p[a] > 0) d += p[a] * (std::log(p[a]) - log_q[a]);
  return d;
}

}  // namespace detail

/// H(A | S, Z): the smallest achievable actor NLL for this encoding.
inline double closed_form_optimum(const ActorProblem& problem) {
  CompensatedSum total;
  for (std::size_t r = 0; r < problem.rows(); ++r) total.add(problem.weight[r] * entropy(problem.target_of(r)));
  return total.value();
}

inline double closed_form_optimum(const RepresentationSpec& spec, const CubeLab& lab) {
  const auto z = lab.pair_z(lab.encode(spec));
  return closed_form_optimum(make_actor_problem(lab.law(), z));
}

/// Group-level expected NLL sum_r w_r CE(q_r, pi_r).
inline double expected_nll(const TabularActor& actor, const ActorProblem& problem) {
  CompensatedSum total;
  std::vector<double> lp(problem.action_count);
  for (std::size_t r = 0; r < problem.rows(); ++r) {
    actor.log_probs(r, lp);
    total.add(problem.weight[r] * detail::cross_entropy(problem.target_of(r), lp));
  }
  return total.value();
}

struct RiskCheck {
  double actor_nll = 0;       ///< L_act = E[-log pi(A | S, Z)], summed pair by pair
  double risk = 0;            ///< E[KL(P(A|S,G) || pi(A|S,Z))], pair by pair
  double modeling_error = 0;  ///< E[KL(P(A|S,Z) || pi(A|S,Z))], group by group
  double delta_a = 0;
  double residual = 0;        ///< max of |risk - (ME + dA)| and |L_act - H(A|S,G) - risk|
};

/// Evaluates both sides of the log-loss and risk decompositions from
/// independent sums. Throws InfiniteDivergence when the actor gives zero
/// probability to an action the expert takes.
inline RiskCheck risk_decomposition_check(const TabularActor& actor, const ActorProblem& problem, const PairLaw& law,
                                          const InfoReport& info) {
  const std::size_t A = problem.action_count;
  std::vector<std::vector<double>> log_pi(problem.rows(), std::vector<double>(A));
  for (std::size_t r = 0; r < problem.rows(); ++r) {
    actor.log_probs(r, log_pi[r]);
    const auto q = problem.target_of(r);
    for (std::size_t a = 0; a < A; ++a)
      if (q[a] > 0 && !std::isfinite(log_pi[r][a]))
        throw InfiniteDivergence("actor row " + std::to_string(r) + " assigns zero probability to action " +
                                 std::to_string(a));
  }
  CompensatedSum nll, risk, model;
  for (std::size_t i = 0; i < law.size(); ++i) {
    const auto& lp = log_pi[problem.pair_row[i]];
    const auto p = law.probs_of(i);
    nll.add(detail::cross_entropy(p, lp));
    risk.add(detail::kl(p, lp));
  }
  for (std::size_t r = 0; r < problem.rows(); ++r) model.add(problem.weight[r] * detail::kl(problem.target_of(r), log_pi[r]));
  const double n = static_cast<double>(law.size());
  RiskCheck out;
  out.actor_nll = nll.value() / n;
  out.risk = risk.value() / n;
  out.modeling_error = model.value();
  out.delta_a = info.delta_a;
  out.residual = std::max(std::abs(out.risk - (out.modeling_error + out.delta_a)),
                          std::abs(out.actor_nll - info.h_a_sg - out.risk));
  return out;
}

struct TrainOptions {
  double lr = 1.0;
  std::size_t max_iters = 5000;
  double tol = 1e-10;
  double max_step = 1e8;
  /// Decomposition checks run at iterates 0, 1, 2, 4, 8, ... and at the end.
  bool check_identities = true;
};

struct TrainReport {
  double nll = 0;
  double h_a_sg = 0;
  double excess = 0;
  double delta_a = 0;
  double modeling_error = 0;
  double optimum = 0;              ///< H(A|S,Z)
  std::size_t iterations = 0;
  bool converged = false;
  double min_bound_slack = std::numeric_limits<double>::infinity();  ///< min over iterates of excess - dA
  double max_identity_residual = 0;
  std::size_t identity_checks = 0;
  std::size_t step_halvings = 0;
  bool monotone = true;
};

/// Consecutive iterations with improvement below tol that count as converged.
inline constexpr std::size_t kQuietIterations = 3;

/// Full-batch gradient descent on the exact expected NLL.
///
/// The loss separates over rows; row r has gradient w_r (pi_r - q_r), which
/// is preconditioned by 1/w_r. Every logit carries its own learning rate,
/// starting at `lr`: doubled while its gradient keeps the same sign, halved
/// when the sign flips. A row update that would raise the row loss is
/// rejected and halves all rates in that row, so the total NLL never
/// increases. Targets with zero entries have their optimum at infinite
/// logits; growing rates reach it geometrically, where a single fixed step
/// converges only at O(1/t).
inline TrainReport train_actor(const PairLaw& law, const ActorProblem& problem, const InfoReport& info,
                               const TrainOptions& opt = {}) {
  if (!(opt.lr > 0)) throw InvalidArgument("learning rate must be positive");
  const std::size_t A = problem.action_count;
  TabularActor actor(problem.rows(), A);
  std::vector<double> rate(problem.rows() * A, opt.lr);
  std::vector<double> prev_grad(problem.rows() * A, 0.0);
  std::vector<double> row_loss(problem.rows());
  std::vector<double> lp(A), grad(A), trial(A), trial_lp(A);

  for (std::size_t r = 0; r < problem.rows(); ++r) {
    actor.log_probs(r, lp);
    row_loss[r] = detail::cross_entropy(problem.target_of(r), lp);
  }

  TrainReport rep;
  rep.h_a_sg = info.h_a_sg;
  rep.delta_a = info.delta_a;
  rep.optimum = closed_form_optimum(problem);

  auto total_loss = [&] {
    CompensatedSum s;
    for (std::size_t r = 0; r < problem.rows(); ++r) s.add(problem.weight[r] * row_loss[r]);
    return s.value();
  };
  auto observe = [&](std::size_t iter, double nll, bool check) {
    if (!std::isfinite(nll)) throw DivergenceError("non-finite actor loss", iter);
    rep.min_bound_slack = std::min(rep.min_bound_slack, (nll - info.h_a_sg) - info.delta_a);
    if (check && opt.check_identities) {
      const auto rc = risk_decomposition_check(actor, problem, law, info);
      rep.max_identity_residual = std::max(rep.max_identity_residual, rc.residual);
      ++rep.identity_checks;
    }
  };

  double nll = total_loss();
  observe(0, nll, true);
  std::size_t next_check = 1;
  std::size_t iter = 0;
  std::size_t quiet = 0;
  while (iter < opt.max_iters) {
    ++iter;
    for (std::size_t r = 0; r < problem.rows(); ++r) {
      const auto q = problem.target_of(r);
      auto theta = actor.logits(r);
      actor.log_probs(r, lp);
      double* eta = rate.data() + r * A;
      double* last = prev_grad.data() + r * A;
      for (std::size_t a = 0; a < A; ++a) {
        grad[a] = std::exp(lp[a]) - q[a];
        const double agree = grad[a] * last[a];
        if (agree > 0)
          eta[a] = std::min(eta[a] * 2, opt.max_step);
        else if (agree < 0)
          eta[a] *= 0.5;
        trial[a] = theta[a] - eta[a] * grad[a];
      }
      TabularActor::log_softmax(trial, trial_lp);
      const double loss = detail::cross_entropy(q, trial_lp);
      if (loss <= row_loss[r]) {
        std::copy(trial.begin(), trial.end(), theta.begin());
        std::copy(grad.begin(), grad.end(), last);
        row_loss[r] = loss;
      } else {
        for (std::size_t a = 0; a < A; ++a) {
          eta[a] *= 0.5;
          last[a] = 0;
        }
        ++rep.step_halvings;
      }
    }
    const double next = total_loss();
    if (next > nll) rep.monotone = false;
    const bool check = iter == next_check;
    if (check) next_check *= 2;
    observe(iter, next, check);
    const double improvement = nll - next;
    nll = next;
    quiet = improvement < opt.tol ? quiet + 1 : 0;
    if (quiet >= kQuietIterations) {
      rep.converged = true;
      break;
    }
  }
  observe(iter, nll, true);
  rep.iterations = iter;
  rep.nll = nll;
  rep.excess = nll - info.h_a_sg;
  rep.modeling_error = rep.excess - info.delta_a;
  return rep;
}

inline TrainReport train_actor(const RepresentationSpec& spec, const CubeLab& lab, const TrainOptions& opt = {}) {
  const auto z = lab.pair_z(lab.encode(spec));
  const auto info = info_report(lab.law(), z, &lab.law_entropies());
  return train_actor(lab.law(), make_actor_problem(lab.law(), z), info, opt);
}

}  // namespace asl
