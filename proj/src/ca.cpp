#include "crowd/ca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace crowd::ca {

const char* to_string(ExitRule rule) {
  return rule == ExitRule::queue ? "queue" : "sampled";
}

ExitRule exit_rule_from_string(const std::string& name) {
  if (name == "queue") return ExitRule::queue;
  if (name == "sampled") return ExitRule::sampled;
  throw ConfigError("exit_rule must be 'queue' or 'sampled', got '" + name + "'");
}

double SimParams::exit_probability() const { return std::min(1.0, p_ex * dt); }

void validate(const SimParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.beta) || p.beta < 0.0) throw ConfigError("beta must be finite and >= 0");
  if (!finite(p.mu) || p.mu > 1.0) throw ConfigError("mu must be finite and <= 1");
  if (!finite(p.p_ex) || p.p_ex <= 0.0) throw ConfigError("p_ex must be > 0");
  if (!finite(p.dt) || p.dt <= 0.0) throw ConfigError("dt must be > 0");
  if (!finite(p.gamma) || p.gamma < 0.0 || p.gamma > 1.0) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (p.n_agents < 0) throw ConfigError("n_agents must be >= 0");
  if (p.step_cap <= 0) throw ConfigError("step_cap must be > 0");
}

// ---------------------------------------------------------------- lattices

namespace {

Lattice empty_lattice(int n) {
  Lattice lat;
  lat.n_cells = n;
  std::array<int, 8> none;
  none.fill(-1);
  lat.neighbor.assign(n, none);
  lat.drop.assign(n, std::array<double, 8>{});
  lat.exit.assign(n, 0);
  lat.leave_drop.assign(n, 0.0);
  return lat;
}

}  // namespace

Lattice corridor_lattice(const CorridorGrid& cg, const ScalarField& phi) {
  const Grid& g = cg.grid;
  if (phi.rows() != g.ny || phi.cols() != g.nx) {
    throw ConfigError("potential does not match the corridor grid");
  }
  Lattice lat = empty_lattice(g.size());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.index({i, j});
      for (int d = 0; d < 8; ++d) {
        const Cell n{i + kDirections[d][0], j + kDirections[d][1]};
        if (!g.contains(n)) continue;
        lat.neighbor[c][d] = g.index(n);
        lat.drop[c][d] = phi(j, i) - phi(n.j, n.i);
      }
      if (cg.exit_mask(j, i)) {
        lat.exit[c] = 1;
        lat.leave_drop[c] = g.h;
      }
    }
  }
  return lat;
}

Lattice line_lattice(const std::vector<double>& phi, double h, bool with_exit) {
  const int n = static_cast<int>(phi.size());
  if (n < 1) throw ConfigError("line lattice needs at least one cell");
  Lattice lat = empty_lattice(n);
  for (int c = 0; c < n; ++c) {
    if (c > 0) {
      lat.neighbor[c][kLeft] = c - 1;
      lat.drop[c][kLeft] = phi[c] - phi[c - 1];
    }
    if (c + 1 < n) {
      lat.neighbor[c][kRight] = c + 1;
      lat.drop[c][kRight] = phi[c] - phi[c + 1];
    }
  }
  if (with_exit) {
    lat.exit[0] = 1;
    lat.leave_drop[0] = h;
  }
  return lat;
}

Lattice ring_lattice(int n_cells, double drop_left) {
  if (n_cells < 3) throw ConfigError("ring lattice needs at least three cells");
  Lattice lat = empty_lattice(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    lat.neighbor[c][kLeft] = (c + n_cells - 1) % n_cells;
    lat.neighbor[c][kRight] = (c + 1) % n_cells;
    lat.drop[c][kLeft] = drop_left;
    lat.drop[c][kRight] = -drop_left;
  }
  return lat;
}

// ------------------------------------------------------------------- rates

double Rates::total_move() const {
  return std::accumulate(move.begin(), move.end(), 0.0) + leave;
}

Rates transition_rates(const Lattice& lat, int cell, const SimParams& p) {
  const auto& nb = lat.neighbor[cell];
  const auto& dr = lat.drop[cell];
  // Softmax over admissible options, shifted by the largest exponent.
  double top = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < 8; ++d) {
    if (nb[d] >= 0) top = std::max(top, p.beta * dr[d]);
  }
  if (lat.exit[cell]) top = std::max(top, p.beta * lat.leave_drop[cell]);

  Rates r;
  if (!std::isfinite(top)) return r;  // isolated cell

  double sum = 0.0;
  for (int d = 0; d < 8; ++d) {
    if (nb[d] >= 0) {
      r.move[d] = std::exp(p.beta * dr[d] - top);
      sum += r.move[d];
    }
  }
  if (lat.exit[cell]) {
    r.leave = std::exp(p.beta * lat.leave_drop[cell] - top);
    sum += r.leave;
  }
  const double scale = p.move_probability() / sum;
  for (double& m : r.move) m *= scale;
  r.leave *= scale;
  r.stay = (2.0 - p.mu) / (3.0 - p.mu);
  return r;
}

std::vector<Rates> rate_table(const Lattice& lat, const SimParams& p) {
  std::vector<Rates> out(lat.n_cells);
  for (int c = 0; c < lat.n_cells; ++c) out[c] = transition_rates(lat, c, p);
  return out;
}

// ------------------------------------------------------------------- state

State State::empty(int n_cells) {
  State s;
  s.occupant.assign(n_cells, -1);
  return s;
}

void State::place(int agent, int cell) {
  if (cell < 0 || cell >= static_cast<int>(occupant.size())) {
    throw std::out_of_range("cell outside the lattice");
  }
  if (occupant[cell] >= 0) throw std::invalid_argument("cell already occupied");
  if (agent >= static_cast<int>(agent_cell.size())) agent_cell.resize(agent + 1, -1);
  if (agent_cell[agent] >= 0) throw std::invalid_argument("agent already placed");
  occupant[cell] = agent;
  agent_cell[agent] = cell;
  ++present;
}

State random_placement(int n_cells, int n_agents, Rng& rng) {
  if (n_agents > n_cells) {
    throw ConfigError("n_agents = " + std::to_string(n_agents) + " exceeds the " +
                      std::to_string(n_cells) + " cells of the domain");
  }
  std::vector<int> cells(n_cells);
  std::iota(cells.begin(), cells.end(), 0);
  State s = State::empty(n_cells);
  s.agent_cell.assign(n_agents, -1);
  for (int k = 0; k < n_agents; ++k) {
    const int pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_cells - k)));
    std::swap(cells[k], cells[pick]);
    s.place(k, cells[k]);
  }
  return s;
}

// -------------------------------------------------------------------- step

std::vector<Intent> sample_intents(const State& s, const Lattice& lat,
                                   const std::vector<Rates>& rates, double gamma,
                                   Rng& rng) {
  std::vector<Intent> out;
  out.reserve(s.present);
  for (int a = 0; a < static_cast<int>(s.agent_cell.size()); ++a) {
    const int c = s.agent_cell[a];
    if (c < 0) continue;
    const Rates& r = rates[c];
    Intent it;
    it.agent = a;
    const double u = rng.uniform();
    double acc = 0.0;
    for (int d = 0; d < 8; ++d) {
      if (r.move[d] <= 0.0) continue;
      acc += r.move[d];
      if (u < acc) {
        it.option = d;
        it.rate = r.move[d];
        break;
      }
    }
    if (it.option == kStay && r.leave > 0.0 && u < acc + r.leave) {
      it.option = kLeave;
      it.rate = r.leave;
    }
    if (it.option >= 0 && it.option < 8) {
      const int n = lat.neighbor[c][it.option];
      if (n < 0) {
        it.option = kStay;
        it.rate = 0.0;
      } else if (s.occupant[n] >= 0) {
        const int n2 = lat.neighbor[n][it.option];
        const bool can_push = n2 >= 0 && s.occupant[n2] < 0;
        if (gamma > 0.0 && can_push && rng.uniform() < gamma) {
          it.push = true;
        } else {
          it.option = kStay;
          it.rate = 0.0;
        }
      }
    }
    out.push_back(it);
  }
  return out;
}

namespace {

// Index into `weights` drawn proportionally to the weights; one uniform.
int pick_weighted(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

StepEvents resolve_intents(State& s, const Lattice& lat, const std::vector<Rates>& rates,
                           const std::vector<Intent>& intents, double exit_probability,
                           ExitRule rule, Rng& rng) {
  StepEvents ev;
  const int n_agents = static_cast<int>(s.agent_cell.size());
  std::vector<char> done(n_agents, 0);    // exited or moved by its own option
  std::vector<char> pushed(n_agents, 0);
  std::vector<double> weights;
  std::vector<int> who;

  // Exit lottery.
  for (const Intent& it : intents) {
    const int c = s.agent_cell[it.agent];
    const bool contends =
        rule == ExitRule::queue ? (c >= 0 && lat.exit[c]) : it.option == kLeave;
    if (!contends) continue;
    who.push_back(it.agent);
    weights.push_back(rates[c].leave);
  }
  if (!who.empty()) {
    int k = 0;
    if (who.size() > 1) {
      ++ev.conflicts;
      k = pick_weighted(weights, rng);
    }
    if (rng.uniform() < exit_probability) {
      const int a = who[k];
      s.occupant[s.agent_cell[a]] = -1;
      s.agent_cell[a] = -1;
      --s.present;
      ++s.exited;
      ++ev.exits;
      done[a] = 1;
    }
  }

  // Claims on target cells: the free cell entered by a mover or by a pushed
  // agent.
  struct Claim {
    int intent;
    int cell;
  };
  std::vector<Claim> claims;
  for (int k = 0; k < static_cast<int>(intents.size()); ++k) {
    const Intent& it = intents[k];
    if (it.option < 0 || it.option >= 8 || done[it.agent]) continue;
    const int c = s.agent_cell[it.agent];
    const int n = lat.neighbor[c][it.option];
    const int target = n < 0 ? -1 : it.push ? lat.neighbor[n][it.option] : n;
    if (target < 0) continue;
    claims.push_back({k, target});
  }
  std::stable_sort(claims.begin(), claims.end(),
                   [](const Claim& a, const Claim& b) { return a.cell < b.cell; });

  std::vector<int> winners;
  for (std::size_t lo = 0; lo < claims.size();) {
    std::size_t hi = lo + 1;
    while (hi < claims.size() && claims[hi].cell == claims[lo].cell) ++hi;
    int k = 0;
    if (hi - lo > 1) {
      ++ev.conflicts;
      weights.clear();
      for (std::size_t m = lo; m < hi; ++m) weights.push_back(intents[claims[m].intent].rate);
      k = pick_weighted(weights, rng);
    }
    winners.push_back(claims[lo + k].intent);
    lo = hi;
  }
  for (int k : winners) done[intents[k].agent] = 1;

  auto shift = [&](int d) {
    if (d == kLeft) return 1;
    if (d == kRight) return -1;
    return 0;
  };

  for (int k : winners) {
    const Intent& it = intents[k];
    if (it.push) continue;
    const int c = s.agent_cell[it.agent];
    const int n = lat.neighbor[c][it.option];
    s.occupant[c] = -1;
    s.occupant[n] = it.agent;
    s.agent_cell[it.agent] = n;
    ++ev.moves;
    ev.displacement_left += shift(it.option);
  }
  for (int k : winners) {
    const Intent& it = intents[k];
    if (!it.push) continue;
    const int c = s.agent_cell[it.agent];
    const int n = lat.neighbor[c][it.option];
    const int n2 = lat.neighbor[n][it.option];
    const int b = s.occupant[n];
    if (b < 0 || done[b] || pushed[b] || s.occupant[n2] >= 0) continue;
    pushed[b] = 1;
    s.occupant[n2] = b;
    s.agent_cell[b] = n2;
    s.occupant[n] = it.agent;
    s.agent_cell[it.agent] = n;
    s.occupant[c] = -1;
    ++ev.pushes;
    ev.displacement_left += 2 * shift(it.option);
  }
  ++s.step;
  return ev;
}

StepEvents step_parallel(State& s, const Lattice& lat, const std::vector<Rates>& rates,
                         const SimParams& p, Rng& rng) {
  const auto intents = sample_intents(s, lat, rates, 0.0, rng);
  return resolve_intents(s, lat, rates, intents, p.exit_probability(), p.exit_rule, rng);
}

StepEvents step_parallel_pushing(State& s, const Lattice& lat,
                                 const std::vector<Rates>& rates, const SimParams& p,
                                 Rng& rng) {
  const auto intents = sample_intents(s, lat, rates, p.gamma, rng);
  return resolve_intents(s, lat, rates, intents, p.exit_probability(), p.exit_rule, rng);
}

// -------------------------------------------------------------------- runs

namespace {

// Per-step occupancy sums of all cells, grown on demand.
struct OccupancyAccumulator {
  int n_cells = 0;
  std::vector<std::int64_t> sums;  // step-major

  void add(long step, const State& s) {
    const std::size_t need = static_cast<std::size_t>(step + 1) * n_cells;
    if (sums.size() < need) sums.resize(need, 0);
    std::int64_t* row = sums.data() + static_cast<std::size_t>(step) * n_cells;
    for (int c = 0; c < n_cells; ++c) row[c] += s.occupant[c] >= 0;
  }
};

RunStatistics run_impl(const CorridorGrid& cg, const Lattice& lat,
                       const std::vector<Rates>& rates, const SimParams& p, Rng& rng,
                       bool pushing, OccupancyAccumulator* occ) {
  State s = random_placement(lat.n_cells, p.n_agents, rng);
  std::vector<int> meas;
  meas.reserve(cg.index.measurement_cells.size());
  for (const Cell& c : cg.index.measurement_cells) meas.push_back(cg.grid.index(c));
  const double area = cg.measurement_area();

  RunStatistics out;
  auto record = [&] {
    int count = 0;
    for (int c : meas) count += s.occupant[c] >= 0;
    out.measurement_counts.push_back(count);
    if (occ) occ->add(s.step, s);
  };
  record();
  long last_exit = 0;
  while (s.present > 0 && s.step < p.step_cap) {
    const StepEvents ev = pushing ? step_parallel_pushing(s, lat, rates, p, rng)
                                  : step_parallel(s, lat, rates, p, rng);
    if (ev.exits > 0) last_exit = s.step;
    record();
  }
  out.complete = s.present == 0;
  out.steps = out.complete ? last_exit : s.step;
  out.exit_time_s = static_cast<double>(out.steps) * p.dt;
  out.density_series.reserve(out.measurement_counts.size());
  for (int c : out.measurement_counts) {
    out.density_series.push_back(c / area);
    out.max_density = std::max(out.max_density, c / area);
  }
  return out;
}

}  // namespace

RunStatistics run_to_exit(const CorridorGrid& cg, const SimParams& p,
                          const PotentialField& phi, std::uint64_t run_index) {
  validate(p);
  const Lattice lat = corridor_lattice(cg, phi.values);
  const auto rates = rate_table(lat, p);
  Rng rng(p.seed, run_index);
  return run_impl(cg, lat, rates, p, rng, p.gamma > 0.0, nullptr);
}

RunStatistics run_to_exit(const CorridorGrid& cg, const Lattice& lat,
                          const std::vector<Rates>& rates, const SimParams& p, Rng& rng,
                          bool pushing) {
  return run_impl(cg, lat, rates, p, rng, pushing, nullptr);
}

long single_agent_steps(const Lattice& lat, const std::vector<Rates>& rates,
                        const SimParams& p, int start, Rng& rng) {
  State s = State::empty(lat.n_cells);
  s.agent_cell.assign(1, -1);
  s.place(0, start);
  while (s.present > 0) {
    if (s.step >= p.step_cap) return -1;
    step_parallel(s, lat, rates, p, rng);
  }
  return s.step;
}

EnsembleStatistics monte_carlo(const CorridorGrid& cg, const SimParams& p,
                               const PotentialField& phi, const MonteCarloOptions& opts) {
  validate(p);
  if (opts.n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (!(opts.histogram_bin > 0.0)) throw ConfigError("histogram bin must be > 0");
  const Lattice lat = corridor_lattice(cg, phi.values);
  const auto rates = rate_table(lat, p);
  const int n_cells = lat.n_cells;
  const int threads = std::clamp(opts.threads, 1, opts.n_runs);

  struct Partial {
    std::vector<std::int64_t> count_sum, count_sq;
    OccupancyAccumulator occ;
  };
  std::vector<Partial> partial(threads);
  std::vector<RunStatistics> runs(opts.n_runs);
  std::vector<std::exception_ptr> errors(threads);

  auto work = [&](int w) {
    try {
      Partial& part = partial[w];
      part.occ.n_cells = n_cells;
      for (int r = w; r < opts.n_runs; r += threads) {
        Rng rng(p.seed, static_cast<std::uint64_t>(r));
        RunStatistics st = run_impl(cg, lat, rates, p, rng, opts.pushing,
                                    opts.density_map ? &part.occ : nullptr);
        const auto& mc = st.measurement_counts;
        if (part.count_sum.size() < mc.size()) {
          part.count_sum.resize(mc.size(), 0);
          part.count_sq.resize(mc.size(), 0);
        }
        for (std::size_t t = 0; t < mc.size(); ++t) {
          part.count_sum[t] += mc[t];
          part.count_sq[t] += static_cast<std::int64_t>(mc[t]) * mc[t];
        }
        st.measurement_counts.clear();
        st.measurement_counts.shrink_to_fit();
        runs[r] = std::move(st);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleStatistics out;
  out.n_runs = opts.n_runs;
  const double n = opts.n_runs;
  double sum = 0.0, max_sum = 0.0, longest = 0.0;
  for (const RunStatistics& st : runs) {
    out.exit_times.push_back(st.exit_time_s);
    out.incomplete_runs += !st.complete;
    sum += st.exit_time_s;
    max_sum += st.max_density;
    longest = std::max(longest, st.exit_time_s);
  }
  out.mean_exit_time = sum / n;
  out.mean_run_max_density = max_sum / n;
  double ss = 0.0;
  for (double t : out.exit_times) ss += (t - out.mean_exit_time) * (t - out.mean_exit_time);
  out.std_exit_time = opts.n_runs > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  out.exit_histogram.bin_width = opts.histogram_bin;
  out.exit_histogram.counts.assign(static_cast<std::size_t>(longest / opts.histogram_bin) + 1, 0);
  for (double t : out.exit_times) {
    ++out.exit_histogram.counts[static_cast<std::size_t>(t / opts.histogram_bin)];
  }

  // Integer partial sums make the reduction independent of the thread count.
  std::vector<std::int64_t> csum, csq;
  for (const Partial& part : partial) {
    if (csum.size() < part.count_sum.size()) {
      csum.resize(part.count_sum.size(), 0);
      csq.resize(part.count_sum.size(), 0);
    }
    for (std::size_t t = 0; t < part.count_sum.size(); ++t) {
      csum[t] += part.count_sum[t];
      csq[t] += part.count_sq[t];
    }
  }
  const double area = cg.measurement_area();
  out.mean_density_series.resize(csum.size());
  for (std::size_t t = 0; t < csum.size(); ++t) {
    const double mean = static_cast<double>(csum[t]) / n;
    out.mean_density_series[t] = mean / area;
    if (out.mean_density_series[t] > out.peak_mean_density) {
      out.peak_mean_density = out.mean_density_series[t];
      out.peak_step = static_cast<long>(t);
      const double var =
          opts.n_runs > 1 ? std::max(0.0, (static_cast<double>(csq[t]) - n * mean * mean) / (n - 1.0))
                          : 0.0;
      out.peak_mean_density_se = std::sqrt(var / n) / area;
    }
  }

  if (opts.density_map) {
    std::vector<std::int64_t> occ;
    for (const Partial& part : partial) {
      if (occ.size() < part.occ.sums.size()) occ.resize(part.occ.sums.size(), 0);
      for (std::size_t k = 0; k < part.occ.sums.size(); ++k) occ[k] += part.occ.sums[k];
    }
    std::vector<std::int64_t> best(n_cells, 0);
    for (std::size_t k = 0; k < occ.size(); ++k) {
      const int c = static_cast<int>(k % n_cells);
      best[c] = std::max(best[c], occ[k]);
    }
    const double h2 = cg.grid.h * cg.grid.h;
    out.max_density_map = cg.grid.zeros<double>();
    for (int c = 0; c < n_cells; ++c) {
      const Cell cell = cg.grid.cell(c);
      out.max_density_map(cell.j, cell.i) = static_cast<double>(best[c]) / n / h2;
    }
  }
  return out;
}

int count_modes(const std::vector<long>& counts, int window, double min_fraction) {
  const int n = static_cast<int>(counts.size());
  if (n == 0) return 0;
  const int half = std::max(0, window / 2);
  std::vector<double> s(n, 0.0);
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int k = lo; k <= hi; ++k) acc += counts[k];
    s[i] = acc / (hi - lo + 1);
  }
  const double top = *std::max_element(s.begin(), s.end());
  if (top <= 0.0) return 0;
  int modes = 0;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    const bool rise = i == 0 || s[i - 1] < s[i];
    const bool fall = j == n - 1 || s[j + 1] < s[i];
    if (rise && fall && s[i] >= min_fraction * top) ++modes;
    i = j + 1;
  }
  return modes;
}

// -------------------------------------------------------------- mean field

MeanFieldRates mean_field_rates(const Lattice& lat, const std::vector<Rates>& rates,
                                double exit_probability, ExitRule rule) {
  MeanFieldRates out;
  out.move.resize(lat.n_cells);
  out.exit_loss.assign(lat.n_cells, 0.0);
  for (int c = 0; c < lat.n_cells; ++c) {
    out.move[c] = rates[c].move;
    if (!lat.exit[c]) continue;
    if (rule == ExitRule::queue) {
      out.exit_loss[c] = exit_probability;
      for (double& m : out.move[c]) m *= 1.0 - exit_probability;
    } else {
      out.exit_loss[c] = rates[c].leave * exit_probability;
    }
  }
  return out;
}

namespace {

void check_range(const Eigen::VectorXd& rho, const char* what) {
  for (Eigen::Index c = 0; c < rho.size(); ++c) {
    if (!(rho[c] >= -1e-12 && rho[c] <= 1.0 + 1e-12)) {
      throw NumericalError(std::string(what) + ": occupation " + std::to_string(rho[c]) +
                           " at cell " + std::to_string(c) + " outside [0, 1]");
    }
  }
}

}  // namespace

Eigen::VectorXd master_equation_step(const Lattice& lat, const MeanFieldRates& r,
                                     const Eigen::VectorXd& rho) {
  if (rho.size() != lat.n_cells) throw std::invalid_argument("density size mismatch");
  Eigen::VectorXd out = rho;
  for (int c = 0; c < lat.n_cells; ++c) {
    double delta = -r.exit_loss[c] * rho[c];
    for (int d = 0; d < 8; ++d) {
      const int n = lat.neighbor[c][d];
      if (n < 0) continue;
      delta -= rho[c] * r.move[c][d] * (1.0 - rho[n]);
      delta += rho[n] * r.move[n][opposite(d)] * (1.0 - rho[c]);
    }
    out[c] += delta;
  }
  check_range(out, "master equation");
  return out;
}

Eigen::VectorXd master_equation_step_pushing(const Lattice& lat, const MeanFieldRates& r,
                                             const Eigen::VectorXd& rho, double gamma) {
  if (rho.size() != lat.n_cells) throw std::invalid_argument("density size mismatch");
  // Missing cells count as occupied so that no move or push leads there.
  auto at = [&](int c) { return c < 0 ? 1.0 : rho[c]; };
  Eigen::VectorXd out = rho;
  for (int x = 0; x < lat.n_cells; ++x) {
    double delta = -r.exit_loss[x] * rho[x];
    for (int d : {kLeft, kRight}) {
      const int n1 = lat.neighbor[x][d];
      if (n1 < 0) continue;
      const int n2 = lat.neighbor[n1][d];
      const int back = opposite(d);
      delta -= rho[x] * r.move[x][d] * ((1.0 - rho[n1]) + gamma * rho[n1] * (1.0 - at(n2)));
      delta += rho[n1] * r.move[n1][back] * (1.0 - rho[x]);
      if (n2 >= 0) delta += gamma * rho[n1] * rho[n2] * r.move[n2][back] * (1.0 - rho[x]);
    }
    out[x] += delta;
  }
  check_range(out, "pushing master equation");
  return out;
}

Eigen::VectorXd single_agent_step(const Lattice& lat, const MeanFieldRates& r,
                                  const Eigen::VectorXd& p) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lat.n_cells);
  for (int c = 0; c < lat.n_cells; ++c) {
    double leave = r.exit_loss[c];
    for (int d = 0; d < 8; ++d) {
      const int n = lat.neighbor[c][d];
      if (n < 0) continue;
      out[n] += p[c] * r.move[c][d];
      leave += r.move[c][d];
    }
    out[c] += p[c] * (1.0 - leave);
  }
  return out;
}

Eigen::VectorXd to_vector(const ScalarField& f) {
  const int nx = static_cast<int>(f.cols()), ny = static_cast<int>(f.rows());
  Eigen::VectorXd v(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) v[j * nx + i] = f(j, i);
  }
  return v;
}

ScalarField to_field(const Eigen::VectorXd& v, const Grid& g) {
  if (v.size() != g.size()) throw std::invalid_argument("vector size does not match grid");
  ScalarField f(g.ny, g.nx);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) f(j, i) = v[j * g.nx + i];
  }
  return f;
}

// ---------------------------------------------------------------- velocity

VelocityEstimate ring_velocity(int n_cells, double density, double drop_per_cell,
                               const SimParams& p, bool pushing, int warmup_steps,
                               int measure_steps, int n_runs) {
  if (!(density > 0.0 && density < 1.0)) throw ConfigError("density must lie in (0, 1)");
  if (measure_steps < 1 || n_runs < 1) throw ConfigError("need at least one step and run");
  const Lattice lat = ring_lattice(n_cells, drop_per_cell);
  const auto rates = rate_table(lat, p);
  const int agents = std::max(1, static_cast<int>(std::lround(density * n_cells)));
  std::vector<double> v(n_runs);
  for (int r = 0; r < n_runs; ++r) {
    Rng rng(p.seed, static_cast<std::uint64_t>(r));
    State s = random_placement(n_cells, agents, rng);
    SimParams q = p;
    if (!pushing) q.gamma = 0.0;
    long disp = 0;
    for (int t = 0; t < warmup_steps + measure_steps; ++t) {
      const StepEvents ev = step_parallel_pushing(s, lat, rates, q, rng);
      if (t >= warmup_steps) disp += ev.displacement_left;
    }
    v[r] = static_cast<double>(disp) / (static_cast<double>(agents) * measure_steps);
  }
  VelocityEstimate out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n_runs;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.standard_error = n_runs > 1 ? std::sqrt(ss / (n_runs - 1.0) / n_runs) : 0.0;
  return out;
}

}  // namespace crowd::ca
