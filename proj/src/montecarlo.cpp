#include "fluct/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fluct {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// the walk is dead once S_k <= 0; on a lattice grid the comparison gets a
// half-gridpoint cushion against float accumulation
double death_threshold(const StepModel& m) {
  if (!m.is_lattice()) return 0.0;
  if (m.shift_is_rational && m.shift_frac.den > 0)
    return m.span_h / (2.0 * static_cast<double>(m.shift_frac.den));
  return 1e-9;
}

struct WorkerBuf {
  std::vector<double> values;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
};

// deterministic round-based harness: every worker runs `batch` paths per
// round with its own stream; rounds repeat until the merged hit count
// reaches the target. visit(rng, out) simulates one path and may append.
template <typename Visit>
std::vector<WorkerBuf> run_rounds(std::uint64_t target_hits, std::uint64_t batch, McOptions opts,
                                  std::uint64_t abort_trials, const Visit& visit) {
  const int w_cnt = std::max(1, opts.workers);
  std::vector<WorkerBuf> bufs(static_cast<std::size_t>(w_cnt));
  std::vector<RngStream> streams;
  streams.reserve(static_cast<std::size_t>(w_cnt));
  for (int w = 0; w < w_cnt; ++w) streams.emplace_back(opts.seed, static_cast<std::uint64_t>(w));

  for (;;) {
    auto run_one = [&](int w) {
      WorkerBuf& buf = bufs[static_cast<std::size_t>(w)];
      RngStream& rng = streams[static_cast<std::size_t>(w)];
      for (std::uint64_t i = 0; i < batch; ++i) {
        ++buf.trials;
        visit(rng, buf);
      }
    };
    if (w_cnt == 1) {
      run_one(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(w_cnt));
      for (int w = 0; w < w_cnt; ++w) threads.emplace_back(run_one, w);
      for (auto& t : threads) t.join();
    }
    std::uint64_t hits = 0, trials = 0;
    for (const auto& b : bufs) { hits += b.hits; trials += b.trials; }
    if (hits >= target_hits) break;
    if (trials >= abort_trials &&
        static_cast<double>(hits) < 1e-6 * static_cast<double>(trials))
      throw std::runtime_error(
          "monte carlo: acceptance rate below 1e-6; lower n or raise the budget");
  }
  return bufs;
}

}  // namespace

ConditionedSample simulate_conditioned(StepModelPtr model, long n, std::uint64_t target_accepted,
                                       McOptions opts) {
  if (n < 1) throw std::invalid_argument("simulate_conditioned: n >= 1 required");
  const double t0 = now_seconds();
  const double eps = death_threshold(*model);
  const StepModel& m = *model;
  const std::uint64_t batch =
      std::max<std::uint64_t>(4096, target_accepted / (4 * static_cast<std::uint64_t>(
                                                               std::max(1, opts.workers))));
  auto visit = [&](RngStream& rng, WorkerBuf& buf) {
    double s = 0.0;
    for (long k = 0; k < n; ++k) {
      s += m.sample(rng);
      if (s <= eps) return;
    }
    buf.values.push_back(s);
    ++buf.hits;
  };
  const auto bufs = run_rounds(target_accepted, batch, opts,
                               std::max<std::uint64_t>(10'000'000, 100 * target_accepted), visit);

  ConditionedSample out;
  std::uint64_t trials = 0;
  for (const auto& b : bufs) {
    trials += b.trials;
    out.terminal.insert(out.terminal.end(), b.values.begin(), b.values.end());
  }
  out.trials = trials;
  const double rate = static_cast<double>(out.terminal.size()) / static_cast<double>(trials);
  out.survival.value = rate;
  out.survival.std_err = std::sqrt(rate * (1 - rate) / static_cast<double>(trials));
  out.survival.n_samples = trials;
  out.survival.seed = opts.seed;
  out.survival.wall_clock = now_seconds() - t0;
  return out;
}

namespace {
Histogram bin_samples(const std::vector<double>& samples, double scale, int n_bins, double z_max,
                      bool flagged) {
  Histogram h;
  h.flagged = flagged;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = z_max * static_cast<double>(i) / n_bins;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n_bins), 0);
  std::uint64_t in_grid = 0;
  for (double s : samples) {
    const double z = s / scale;
    if (z >= z_max) { ++h.overflow; continue; }
    const auto b = static_cast<std::size_t>(z / z_max * n_bins);
    ++counts[std::min(b, static_cast<std::size_t>(n_bins - 1))];
    ++in_grid;
  }
  h.accepted = in_grid;
  h.density.assign(static_cast<std::size_t>(n_bins), 0.0);
  h.std_err.assign(static_cast<std::size_t>(n_bins), 0.0);
  if (in_grid == 0) { h.flagged = true; return h; }
  const double width = z_max / n_bins;
  for (int i = 0; i < n_bins; ++i) {
    const double p = static_cast<double>(counts[static_cast<std::size_t>(i)]) /
                     static_cast<double>(in_grid);
    h.density[static_cast<std::size_t>(i)] = p / width;
    h.std_err[static_cast<std::size_t>(i)] =
        std::sqrt(p * (1 - p) / static_cast<double>(in_grid)) / width;
  }
  return h;
}
}  // namespace

Histogram meander_hist(StepModelPtr model, long n, int n_bins, std::uint64_t target_accepted,
                       McOptions opts, double z_max) {
  const auto sample = simulate_conditioned(model, n, target_accepted, opts);
  const double cn = NormSeq(model).c(n);
  return bin_samples(sample.terminal, cn, n_bins, z_max,
                     sample.terminal.size() < target_accepted / 2);
}

McEstimate estimate_negative_moment(StepModelPtr model, long n, double alpha_exp,
                                    std::uint64_t target_accepted, McOptions opts) {
  if (!(model->tail.alpha < 2.0) || !(model->tail.beta < 1.0))
    throw std::domain_error(
        "estimate_negative_moment: identity regime requires alpha < 2 and beta < 1");
  const double t0 = now_seconds();
  const auto sample = simulate_conditioned(model, n, target_accepted, opts);
  const double cn = NormSeq(model).c(n);
  const std::size_t cnt = sample.terminal.size();
  std::vector<double> vals(cnt);
  for (std::size_t i = 0; i < cnt; ++i)
    vals[i] = std::pow(sample.terminal[i] / cn, -alpha_exp);

  McEstimate est;
  est.seed = opts.seed;
  est.n_samples = cnt;
  KahanSum total;
  for (double v : vals) total.add(v);
  est.value = total.value() / static_cast<double>(cnt);

  // delete-block jackknife over 20 contiguous blocks
  const std::size_t blocks = std::min<std::size_t>(20, cnt);
  std::vector<double> block_sum(blocks, 0.0);
  std::vector<std::size_t> block_cnt(blocks, 0);
  for (std::size_t i = 0; i < cnt; ++i) {
    const std::size_t b = i * blocks / cnt;
    block_sum[b] += vals[i];
    ++block_cnt[b];
  }
  double var = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double theta_b =
        (total.value() - block_sum[b]) / static_cast<double>(cnt - block_cnt[b]);
    var += (theta_b - est.value) * (theta_b - est.value);
  }
  var *= static_cast<double>(blocks - 1) / static_cast<double>(blocks);
  est.std_err = std::sqrt(var);
  est.wall_clock = now_seconds() - t0;
  return est;
}

PositivityEstimate positivity_sequence(StepModelPtr model, long n_max, std::uint64_t paths,
                                       McOptions opts) {
  const StepModel& m = *model;
  const double eps = death_threshold(m);
  const int w_cnt = std::max(1, opts.workers);
  const std::uint64_t per_worker = (paths + static_cast<std::uint64_t>(w_cnt) - 1) /
                                   static_cast<std::uint64_t>(w_cnt);
  std::vector<std::vector<std::uint64_t>> counts(
      static_cast<std::size_t>(w_cnt),
      std::vector<std::uint64_t>(static_cast<std::size_t>(n_max) + 1, 0));
  auto run_one = [&](int w) {
    RngStream rng(opts.seed, static_cast<std::uint64_t>(w));
    auto& cnt = counts[static_cast<std::size_t>(w)];
    for (std::uint64_t i = 0; i < per_worker; ++i) {
      double s = 0.0;
      for (long k = 1; k <= n_max; ++k) {
        s += m.sample(rng);
        if (s <= eps) ++cnt[static_cast<std::size_t>(k)];
      }
    }
  };
  if (w_cnt == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < w_cnt; ++w) threads.emplace_back(run_one, w);
    for (auto& t : threads) t.join();
  }
  const double total = static_cast<double>(per_worker) * w_cnt;
  PositivityEstimate out;
  out.q.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  out.se.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (long k = 1; k <= n_max; ++k) {
    std::uint64_t c = 0;
    for (const auto& cw : counts) c += cw[static_cast<std::size_t>(k)];
    const double q = static_cast<double>(c) / total;
    out.q[static_cast<std::size_t>(k)] = q;
    out.se[static_cast<std::size_t>(k)] = std::sqrt(q * (1 - q) / total);
  }
  return out;
}

Histogram conditional_jump_law(StepModelPtr model, long n, std::uint64_t target_hits,
                               McOptions opts, double z_max) {
  if (!(model->tail.alpha < 2.0) || !(model->tail.beta < 1.0))
    throw std::domain_error("conditional_jump_law: requires alpha < 2 and beta < 1");
  const StepModel& m = *model;
  const double eps = death_threshold(m);
  const std::uint64_t batch = std::max<std::uint64_t>(
      8192, target_hits * 16 / static_cast<std::uint64_t>(std::max(1, opts.workers)));
  auto visit = [&](RngStream& rng, WorkerBuf& buf) {
    double s = 0.0, prev = 0.0;
    for (long k = 1; k <= n; ++k) {
      prev = s;
      s += m.sample(rng);
      if (s <= eps) {
        if (k == n) {
          buf.values.push_back(prev);
          ++buf.hits;
        }
        return;
      }
    }
  };
  const auto bufs = run_rounds(target_hits, batch, opts,
                               std::max<std::uint64_t>(50'000'000, 2000 * target_hits), visit);
  std::vector<double> positions;
  for (const auto& b : bufs) positions.insert(positions.end(), b.values.begin(), b.values.end());
  const double cn = NormSeq(model).c(n);
  return bin_samples(positions, cn, 32, z_max, positions.size() < target_hits / 2);
}

std::string mc_json_record(const std::string& op, const std::string& model, long n,
                           const McOptions& opts, const McEstimate& est) {
  nlohmann::json j;
  j["op"] = op;
  j["model"] = model;
  j["n"] = n;
  j["seed"] = opts.seed;
  j["workers"] = opts.workers;
  j["value"] = est.value;
  j["std_err"] = est.std_err;
  j["n_samples"] = est.n_samples;
  j["wall_clock"] = est.wall_clock;
  return j.dump();
}

}  // namespace fluct
