#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augmentor/distances.hpp"

namespace augmentor {

enum class LossKind { absolute_linear, squared_clipped };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Bounded loss on a scalar sample z with hypothesis h = (h0, h1):
///   absolute_linear: min(|h0 + h1 z|, M)    Lipschitz |h1|
///   squared_clipped: min((h0 + h1 z)^2, M)  Lipschitz 2 sqrt(M) |h1|
struct LossSpec {
  LossKind kind = LossKind::absolute_linear;
  double lipschitz_constant = 1.0;
  double bound = 1.0;
  double h0 = 0.0;
  double h1 = 1.0;

  /// Builds a spec with the analytic Lipschitz constant filled in.
  static LossSpec make(LossKind kind, double h0, double h1, double bound);

  [[nodiscard]] double operator()(double z) const;
  void validate() const;
};

double analytic_lipschitz(LossKind kind, double h1, double bound);

struct DualityCheck {
  double gap = 0.0;
  double w1 = 0.0;
  bool holds = false;
};

/// |E_P l - E_Q l| against L * W1(P, Q) on one-dimensional samples.
DualityCheck duality_gap_check(const SampleSet& p, const SampleSet& q, const LossSpec& loss);

struct RademacherEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo empirical Rademacher complexity of a finite loss class:
/// mean over seeded sign vectors of max_h |(1/n) sum sigma_i l_h(z_i)|.
/// Draw d uses its own stream derived from (seed, d).
RademacherEstimate rademacher_estimate(const std::vector<LossSpec>& grid, const SampleSet& sample,
                                       int n_sign_draws, std::uint64_t seed);

struct BoundReport {
  double lhs = 0.0;
  double w1_term = 0.0;
  double rademacher_term = 0.0;
  double confidence_term = 0.0;
  double delta = 0.05;
  bool holds = false;
};

/// Checks E_real l - Ehat_synth l <= L W1 + 2 R_n + M sqrt(log(1/delta) / 2n)
/// with n the synthetic sample size and R_n estimated on the synthetic sample.
BoundReport theorem_bound_check(const SampleSet& real, const SampleSet& synth, const LossSpec& loss,
                                const std::vector<LossSpec>& hypothesis_grid, double delta,
                                std::uint64_t seed, int n_sign_draws = 1000);

}  // namespace augmentor
