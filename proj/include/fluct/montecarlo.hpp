#ifndef FLUCT_MONTECARLO_HPP
#define FLUCT_MONTECARLO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fluct/step_models.hpp"

namespace fluct {

struct McOptions {
  std::uint64_t seed = 1;
  int workers = 1;
};

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  double wall_clock = 0.0;
};

/// Rejection sampling of paths conditioned on tau^- > n: paths die at the
/// first S_k <= 0; accepted terminal values are merged in worker order, so
/// results are bit-identical for a fixed (seed, workers).
struct ConditionedSample {
  std::vector<double> terminal;
  McEstimate survival;  // acceptance-rate estimate of P(tau^- > n)
  std::uint64_t trials = 0;
};
ConditionedSample simulate_conditioned(StepModelPtr model, long n, std::uint64_t target_accepted,
                                       McOptions opts);

struct Histogram {
  std::vector<double> edges;    // n_bins + 1
  std::vector<double> density;  // unit mass over [0, z_max]
  std::vector<double> std_err;
  std::uint64_t accepted = 0;
  std::uint64_t overflow = 0;  // samples beyond z_max
  bool flagged = false;        // too few hits for the requested target
  double bin_mass(std::size_t i) const { return density[i] * (edges[i + 1] - edges[i]); }
};

/// Binned density of S_n/c_n given tau^- > n.
Histogram meander_hist(StepModelPtr model, long n, int n_bins, std::uint64_t target_accepted,
                       McOptions opts, double z_max = 6.0);

/// E[(S_n/c_n)^{-alpha_exp} | tau^- > n] with delete-block jackknife errors.
/// Requires the identity regime alpha < 2, beta < 1.
McEstimate estimate_negative_moment(StepModelPtr model, long n, double alpha_exp,
                                    std::uint64_t target_accepted, McOptions opts);

/// One pass over `paths` full trajectories: q_n = P(S_n <= 0) for n <= N.
struct PositivityEstimate {
  std::vector<double> q;   // index n, [0] unused
  std::vector<double> se;  // binomial standard errors
};
PositivityEstimate positivity_sequence(StepModelPtr model, long n_max, std::uint64_t paths,
                                       McOptions opts);

/// Binned law of S_{n-1}/c_n among paths with tau^- = n exactly.
Histogram conditional_jump_law(StepModelPtr model, long n, std::uint64_t target_hits,
                               McOptions opts, double z_max = 8.0);

/// JSON result record: {op, model, n, seed, workers, value, std_err,
/// n_samples, wall_clock}.
std::string mc_json_record(const std::string& op, const std::string& model, long n,
                           const McOptions& opts, const McEstimate& est);

}  // namespace fluct

#endif
