#ifndef FLUCT_WIENER_HOPF_HPP
#define FLUCT_WIENER_HOPF_HPP

#include <iosfwd>
#include <vector>

#include "fluct/series.hpp"
#include "fluct/step_models.hpp"

namespace fluct {

enum class LadderSign { plus, minus };

/// P(tau = n), n = 1..N (index 0 unused), from the positivity sequence
/// q_n = P(S_n <= 0) (minus) or q_n = P(S_n > 0) (plus):
/// 1 - E z^tau = exp{-sum q_n z^n / n}.
std::vector<double> tau_pmf_from_positivity(const std::vector<double>& q, std::size_t n_max,
                                            LadderSign sign);

/// First-order error propagation: std errors of the pmf induced by per-n
/// standard errors of a Monte Carlo positivity sequence.
std::vector<double> tau_pmf_std_err(const std::vector<double>& q_std_err,
                                    const std::vector<double>& pmf, std::size_t n_max);

/// Max |coefficient| of (1 - E z^{tau+})(1 - E z^{tau-}) - (1 - z) up to order N.
double verify_factorization(const std::vector<double>& pmf_plus,
                            const std::vector<double>& pmf_minus, std::size_t n_max);

/// P(tau > n) = 1 - sum_{k<=n} pmf_k, n = 0..N.
std::vector<double> tau_tail(const std::vector<double>& pmf, std::size_t n_max);

/// Exact positivity/zero sequences of the unconditioned walk, n = 1..N
/// (index 0 unused). leq0 drives tau^-, gt0 drives tau^+; lt0/eq0 support
/// the strict-descent (T^-) diagnostics.
struct PositivitySeq {
  std::vector<double> leq0, lt0, eq0, gt0;
  double defect = 0.0;  // range/truncation error bound on each entry
};
PositivitySeq positivity_from_dp(const StepModel& model, long n_max,
                                 long long range_cap = 1 << 13);

/// Wiener-Hopf input pair from a DP positivity sequence: the range-cap loss
/// is split between tails by the model's tail balance, and q+ is the exact
/// complement 1 - q-, which the factorization identity requires.
struct WhInput {
  std::vector<double> q_minus, q_plus;
};
WhInput wh_input_from_dp(const PositivitySeq& seq, double left_mass_q = 0.5);

/// Spitzer average (1/n) sum_{k<=n} P(S_k > 0), n = 1..N (diagnostic).
std::vector<double> spitzer_average(const PositivitySeq& seq);

/// CSV schema: n,pmf_plus,pmf_minus,tail_plus,tail_minus,factorization_residual
void export_wh_csv(std::ostream& out, const std::vector<double>& pmf_plus,
                   const std::vector<double>& pmf_minus);

}  // namespace fluct

#endif
