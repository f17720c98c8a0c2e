#ifndef FLUCT_EXACT_DP_HPP
#define FLUCT_EXACT_DP_HPP

#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include "fluct/fft.hpp"
#include "fluct/step_models.hpp"

namespace fluct {

/// Which states get absorbed after each step. leq0/lt0 kill the walk at or
/// below zero (tau^-, T^-); gt0 kills above zero and is the engine behind the
/// ladder-height collector (equivalently: lt0 on the negated walk).
enum class AbsorbRule { leq0, lt0, gt0 };

struct DpOptions {
  AbsorbRule rule = AbsorbRule::leq0;
  double range_eps = 1e-14;              // per-row far-tail trim budget
  std::size_t max_row_width = 1u << 24;  // memory guard -> partial table
  std::size_t fft_threshold = 1u << 22;  // direct conv above this width*support cost
  std::size_t width_cap = 0;             // hard far-side cap (0 = none); capped mass -> defect
};

/// One probability row on the lattice: probs[i] sits at offset k_lo + i,
/// i.e. at walk value shift_a*n + (k_lo+i)*span_h.
struct DpRow {
  long n = 0;
  long long k_lo = 0;
  std::vector<double> probs;
  double alive = 1.0;        // Kahan row sum
  double mass_defect = 0.0;  // accumulated truncation bound (step + range)
};

/// Forward lattice DP with absorption; shared engine for the survival tables
/// and the ladder-height collector.
class LatticeDp {
 public:
  LatticeDp(StepModelPtr model, DpOptions opts);

  struct Absorbed {
    long long k_lo = 0;
    std::vector<double> probs;
    double total = 0.0;
  };
  /// Advances row n -> n+1 and returns the mass absorbed at this step.
  Absorbed step();

  const DpRow& row() const { return row_; }
  const StepModel& model() const { return *model_; }

 private:
  long long boundary_killed_max(long n) const;  // largest killed offset (leq0/lt0)
  long long boundary_killed_min(long n) const;  // smallest killed offset (gt0)

  StepModelPtr model_;
  DpOptions opts_;
  DpRow row_;
  std::unique_ptr<FftConvolver> conv_;
  bool partial_ = false;

 public:
  bool partial() const { return partial_; }
};

/// Exact survival grid  b-bar_n(x) = P(S_n = a n + x h; tau^- > n)  for n <= N.
class SurvivalTable {
 public:
  SurvivalTable(StepModelPtr model, long n_max, DpOptions opts = {});

  long max_n() const { return static_cast<long>(rows_.size()) - 1; }
  bool partial() const { return partial_; }
  const DpRow& row(long n) const;
  const StepModel& model() const { return *model_; }
  /// P(tau^- > n)
  double survival(long n) const { return row(n).alive; }
  double value(long n, long long k) const {
    return model_->shift_a * static_cast<double>(n) + static_cast<double>(k) * model_->span_h;
  }
  /// P(S_n = a n + x h | tau^- > n)
  double conditional_local(long n, long long x) const;
  /// B_n(x) = P(S_n in (0, x); tau^- > n), x real
  double b_open(long n, double x) const;

  /// header: n,offset,prob,survival,mass_defect
  void export_csv(std::ostream& out) const;

 private:
  StepModelPtr model_;
  std::vector<DpRow> rows_;
  bool partial_ = false;
};

/// Convolves a row with the model's step pmf in offset space (no absorption);
/// adds the step-truncation loss to the row's mass_defect.
void convolve_with_step(DpRow& row, const StepModel& model, const DpOptions& opts,
                        std::unique_ptr<FftConvolver>& conv);

/// Exact pmf of the unconditioned walk at time n (offset -> probability).
std::map<long long, double> unconditioned_pmf(const StepModel& model, long n);
/// All unconditioned rows 0..N as dense rows (row n at index n).
std::vector<DpRow> unconditioned_rows(const StepModel& model, long n_max);

/// P(tau^- = n) for n = 1..N from the survival table and the exact left tail
/// of the step law; entry [0] is unused (0).
std::vector<double> tau_minus_pmf_exact(const SurvivalTable& table, long n_max);

/// Max absolute residual of the lattice recurrence
///   n b-bar_n(x) = P(Sbar_n = x) + sum_k sum_{y in I_x(k,n)} b-bar_k(x-y) P(Sbar_{n-k} = y)
/// over n <= N and all stored x.
double verify_recurrence(const StepModel& model, long n_max);
/// Max absolute residual of the distributional recurrence for B_n(x).
double verify_recurrence_rep2(const StepModel& model, long n_max);

}  // namespace fluct

#endif
