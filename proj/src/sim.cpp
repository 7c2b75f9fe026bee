#include "mdq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "mdq/errors.hpp"

namespace mdq {

using detail::require;

namespace {
std::size_t u(int i) { return static_cast<std::size_t>(i); }
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::arrival: return "arrival";
    case EventKind::departure: return "departure";
    case EventKind::reallocation: return "reallocation";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// EventTrace

EventTrace::EventTrace(int classes, long long servers, double horizon)
    : classes_(classes), servers_(servers), horizon_(horizon) {
  require(classes >= 1 && servers >= 1 && horizon > 0.0, "EventTrace: invalid shape");
}

std::span<const double> EventTrace::busy(std::size_t e) const {
  return {busy_.data() + e * u(classes_), u(classes_)};
}

std::size_t EventTrace::index_at(double t) const {
  auto it = std::upper_bound(events_.begin(), events_.end(), t,
                             [](double v, const EventRecord& r) { return v < r.t; });
  return it == events_.begin() ? 0 : static_cast<std::size_t>(it - events_.begin()) - 1;
}

std::size_t EventTrace::index_before(double t) const {
  auto it = std::lower_bound(events_.begin(), events_.end(), t,
                             [](const EventRecord& r, double v) { return r.t < v; });
  return it == events_.begin() ? 0 : static_cast<std::size_t>(it - events_.begin()) - 1;
}

void EventTrace::push(const EventRecord& rec, std::span<const long long> X, std::span<const long long> B,
                      std::span<const long long> A, std::span<const long long> D, std::span<const double> busy) {
  events_.push_back(rec);
  X_.insert(X_.end(), X.begin(), X.end());
  B_.insert(B_.end(), B.begin(), B.end());
  A_.insert(A_.end(), A.begin(), A.end());
  D_.insert(D_.end(), D.begin(), D.end());
  busy_.insert(busy_.end(), busy.begin(), busy.end());
}

std::size_t EventTrace::count(EventKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events_.begin(), events_.end(), [kind](const EventRecord& r) { return r.kind == kind; }));
}

// ---------------------------------------------------------------------------
// Engine

namespace {

struct EngineState {
  double t = 0.0;
  std::vector<long long> X, B, A, D;
  std::vector<double> busy;
};

void check_allocation(std::span<const long long> B, std::span<const long long> X, long long servers, double t) {
  long long total = 0;
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (B[i] < 0) {
      std::ostringstream msg;
      msg << "infeasible allocation at t=" << t << ": constraint B_i >= 0 violated for class " << i + 1
          << " (B=" << B[i] << ")";
      throw InfeasibleAllocation(msg.str());
    }
    if (B[i] > X[i]) {
      std::ostringstream msg;
      msg << "infeasible allocation at t=" << t << ": constraint B_i <= X_i violated for class " << i + 1
          << " (B=" << B[i] << ", X=" << X[i] << ")";
      throw InfeasibleAllocation(msg.str());
    }
    total += B[i];
  }
  if (total > servers) {
    std::ostringstream msg;
    msg << "infeasible allocation at t=" << t << ": constraint sum B_i <= N violated (sum=" << total
        << ", N=" << servers << ")";
    throw InfeasibleAllocation(msg.str());
  }
}

// Drives the next-event loop; `sink(rec, state)` sees every entry, and
// `advance(state, t_next)` is told about each holding interval before the state moves.
template <class Sink, class Advance>
void run_engine(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families, Policy& policy,
                const SimOptions& options, Sink&& sink, Advance&& advance) {
  scheme.validate();
  const int n = scheme.classes();
  require(static_cast<int>(families.size()) == n, "simulate: need one inter-arrival family per class");
  require(static_cast<int>(options.X0.size()) == n, "simulate: X0 must have one entry per class");
  require(options.horizon > 0.0 && std::isfinite(options.horizon), "simulate: horizon must be positive");
  for (long long x : options.X0) require(x >= 0, "simulate: X0 must be nonnegative");

  std::vector<Rng> arrival_rng, service_rng;
  for (int i = 0; i < n; ++i) {
    arrival_rng.emplace_back(derive_seed(options.seed, u(i), 1));
    service_rng.emplace_back(derive_seed(options.seed, u(i), 2));
  }
  std::exponential_distribution<double> expo(1.0);

  EngineState s;
  s.X = options.X0;
  s.B.assign(u(n), 0);
  s.A.assign(u(n), 0);
  s.D.assign(u(n), 0);
  s.busy.assign(u(n), 0.0);
  std::vector<long long> next_B(u(n), 0);

  std::vector<double> next_arrival(u(n), kInf), next_completion(u(n), kInf);
  for (int i = 0; i < n; ++i)
    if (scheme.lambda_n[u(i)] > 0.0)
      next_arrival[u(i)] = families[u(i)].sample(arrival_rng[u(i)]) / scheme.lambda_n[u(i)];

  auto decide = [&](bool force_redraw_cls, int fired) {
    const SystemView view{s.t, scheme.servers, s.X, s.A, s.D, s.B, s.busy};
    policy.allocate(view, next_B);
    check_allocation(next_B, s.X, scheme.servers, s.t);
    for (int i = 0; i < n; ++i) {
      const bool changed = next_B[u(i)] != s.B[u(i)];
      if (changed || (force_redraw_cls && fired == i)) {
        s.B[u(i)] = next_B[u(i)];
        next_completion[u(i)] = s.B[u(i)] > 0
                                    ? s.t + expo(service_rng[u(i)]) / (scheme.mu_n[u(i)] * static_cast<double>(s.B[u(i)]))
                                    : kInf;
      }
    }
  };

  decide(false, -1);
  sink(EventRecord{0.0, -1, EventKind::reallocation}, s);

  std::size_t processed = 0;
  while (true) {
    int arr_cls = -1, dep_cls = -1;
    double t_arr = kInf, t_dep = kInf;
    for (int i = 0; i < n; ++i) {
      if (next_arrival[u(i)] < t_arr) {
        t_arr = next_arrival[u(i)];
        arr_cls = i;
      }
      if (next_completion[u(i)] < t_dep) {
        t_dep = next_completion[u(i)];
        dep_cls = i;
      }
    }
    const double t_trig = policy.next_trigger(s.t);
    const double t_next = std::min({t_arr, t_dep, t_trig});
    if (!(t_next <= options.horizon)) {
      advance(s, options.horizon);
      for (int i = 0; i < n; ++i) s.busy[u(i)] += static_cast<double>(s.B[u(i)]) * (options.horizon - s.t);
      s.t = options.horizon;
      break;
    }
    if (++processed > options.max_events)
      throw NumericalError("simulate: event budget exhausted (" + std::to_string(options.max_events) + " events)");

    advance(s, t_next);
    for (int i = 0; i < n; ++i) s.busy[u(i)] += static_cast<double>(s.B[u(i)]) * (t_next - s.t);
    s.t = t_next;

    if (t_arr <= t_dep && t_arr <= t_trig) {
      const int i = arr_cls;
      ++s.X[u(i)];
      ++s.A[u(i)];
      next_arrival[u(i)] = s.t + families[u(i)].sample(arrival_rng[u(i)]) / scheme.lambda_n[u(i)];
      decide(false, i);
      sink(EventRecord{s.t, i, EventKind::arrival}, s);
    } else if (t_dep <= t_trig) {
      const int i = dep_cls;
      --s.X[u(i)];
      ++s.D[u(i)];
      --s.B[u(i)];  // the finishing server becomes free
      decide(true, i);
      sink(EventRecord{s.t, i, EventKind::departure}, s);
    } else {
      decide(false, -1);
      sink(EventRecord{s.t, -1, EventKind::reallocation}, s);
    }
  }
}

}  // namespace

EventTrace simulate(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families, Policy& policy,
                    const SimOptions& options) {
  EventTrace trace(scheme.classes(), scheme.servers, options.horizon);
  run_engine(
      scheme, families, policy, options,
      [&](const EventRecord& rec, const EngineState& s) { trace.push(rec, s.X, s.B, s.A, s.D, s.busy); },
      [](const EngineState&, double) {});
  return trace;
}

EventTrace simulate(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families,
                    const PolicySpec& policy, const GameSpec& game, const SimOptions& options) {
  auto p = make_policy(policy, game, scheme);
  return simulate(scheme, families, *p, options);
}

double simulate_payoff(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families, Policy& policy,
                       const SimOptions& options, const CostFunctions& costs, PayoffTarget target) {
  const int n = scheme.classes();
  const double scale = scheme.scale();
  std::vector<double> level(u(n));
  auto scaled = [&](const EngineState& s) {
    for (int i = 0; i < n; ++i) {
      const double v = target == PayoffTarget::X
                           ? static_cast<double>(s.X[u(i)]) - scheme.rho(i) * static_cast<double>(scheme.servers)
                           : static_cast<double>(s.X[u(i)] - s.B[u(i)]);
      level[u(i)] = v / scale;
    }
  };
  double running = 0.0;
  run_engine(
      scheme, families, policy, options, [](const EventRecord&, const EngineState&) {},
      [&](const EngineState& s, double t_next) {
        scaled(s);
        if (t_next > s.t) running += costs.h(level) * (t_next - s.t);
      });
  // the final advance() call saw the state at T
  const double terminal = costs.g(level);
  const double total = running + terminal;
  if (!std::isfinite(total)) throw NumericalError("simulate_payoff: non-finite payoff");
  return total;
}

// ---------------------------------------------------------------------------
// Scaling, payoff, audits

double ScaledTrace::workload_push(std::size_t e) const {
  double acc = 0.0;
  for (int i = 0; i < classes; ++i) acc += theta_n[u(i)] * Z[e * u(classes) + u(i)];
  return acc;
}

ScaledTrace scale_trace(const EventTrace& trace, const ScalingScheme& scheme, const TimeGrid& grid) {
  require(trace.classes() == scheme.classes(), "scale_trace: class count mismatch");
  require(std::abs(grid.horizon() - trace.horizon()) <= 1e-12 * trace.horizon(),
          "scale_trace: grid horizon must equal the trace horizon");
  const int n = trace.classes();
  const double scale = scheme.scale();
  const double N = static_cast<double>(scheme.servers);
  const double zfactor = std::sqrt(scheme.n) / scheme.bn;
  ScaledTrace out;
  out.classes = n;
  for (int i = 0; i < n; ++i) out.theta_n.push_back(scheme.theta_n(i));

  auto z_at = [&](int i, double t, double busy) {
    return N * scheme.mu_n[u(i)] / scheme.n * zfactor * (scheme.rho(i) * t - busy / N);
  };

  for (std::size_t e = 0; e < trace.size(); ++e) {
    const double t = trace.event(e).t;
    out.times.push_back(t);
    for (int i = 0; i < n; ++i) {
      const double X = static_cast<double>(trace.X(e)[u(i)]);
      const double B = static_cast<double>(trace.B(e)[u(i)]);
      out.X_tilde.push_back((X - scheme.rho(i) * N) / scale);
      out.Q_tilde.push_back((X - B) / scale);
      out.Z.push_back(z_at(i, t, trace.busy(e)[u(i)]));
    }
  }

  out.X_grid = SampledPath(grid, n);
  out.Q_grid = SampledPath(grid, n);
  out.Z_grid = SampledPath(grid, n);
  for (int k = 0; k < grid.nodes(); ++k) {
    const double t = grid.node(k);
    const std::size_t e = trace.index_before(t);  // left limit
    const double dt = t - trace.event(e).t;
    for (int i = 0; i < n; ++i) {
      out.X_grid(k, i) = out.X_tilde[e * u(n) + u(i)];
      out.Q_grid(k, i) = out.Q_tilde[e * u(n) + u(i)];
      // busy time grows linearly inside the holding interval, so Z is exact here
      const double busy = trace.busy(e)[u(i)] + static_cast<double>(trace.B(e)[u(i)]) * dt;
      out.Z_grid(k, i) = z_at(i, t, busy);
    }
  }
  return out;
}

double step_payoff(std::span<const double> times, std::span<const double> values, int dim, double horizon,
                   const CostFunctions& costs) {
  require(dim >= 1 && values.size() == times.size() * u(dim), "step_payoff: values must have one row per time");
  require(!times.empty() && times.front() <= 0.0, "step_payoff: path must be defined from t = 0");
  double running = 0.0;
  std::size_t last = 0;
  for (std::size_t e = 0; e < times.size(); ++e) {
    if (times[e] > horizon) break;
    last = e;
    const double end = e + 1 < times.size() ? std::min(times[e + 1], horizon) : horizon;
    const double len = end - std::max(times[e], 0.0);
    if (len > 0.0) running += costs.h(values.subspan(e * u(dim), u(dim))) * len;
  }
  return running + costs.g(values.subspan(last * u(dim), u(dim)));
}

double payoff(const ScaledTrace& scaled, double horizon, const CostFunctions& costs, PayoffTarget target) {
  return step_payoff(scaled.times, target == PayoffTarget::X ? scaled.X_tilde : scaled.Q_tilde, scaled.classes,
                     horizon, costs);
}

double payoff(const EventTrace& trace, const ScalingScheme& scheme, const CostFunctions& costs,
              PayoffTarget target) {
  const ScaledTrace scaled = scale_trace(trace, scheme, TimeGrid(trace.horizon(), 1));
  return payoff(scaled, trace.horizon(), costs, target);
}

ConservationReport check_conservation(const EventTrace& trace, const ScalingScheme& scheme) {
  ConservationReport report;
  const int n = trace.classes();
  const long long N = trace.servers();
  const double zfactor = std::sqrt(scheme.n) / scheme.bn;
  auto fail = [&](std::size_t e, const std::string& what) {
    if (report.violations.size() < 20)
      report.violations.push_back("entry " + std::to_string(e) + " (t=" + std::to_string(trace.event(e).t) + "): " + what);
  };
  double prev_push = 0.0;
  for (std::size_t e = 0; e < trace.size(); ++e) {
    ++report.events_checked;
    long long total_B = 0;
    double busy_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const long long X = trace.X(e)[u(i)], B = trace.B(e)[u(i)];
      const long long Q = X - B;
      if (X != Q + B) fail(e, "X = Q + B");
      if (X != trace.X(0)[u(i)] + trace.A(e)[u(i)] - trace.D(e)[u(i)]) fail(e, "X = X(0) + A - D");
      if (B < 0 || B > X) fail(e, "0 <= B_i <= X_i");
      if (Q < 0) fail(e, "Q_i >= 0");
      total_B += B;
      busy_sum += trace.busy(e)[u(i)];
    }
    const long long idle = N - total_B;
    if (N != idle + total_B || idle < 0) fail(e, "N = I + sum B with I >= 0");
    const double t = trace.event(e).t;
    // theta^n . Z = sqrt(n)/b_n (t - sum busy / N)
    const double push = zfactor * (t - busy_sum / static_cast<double>(N));
    const double tol = 1e-9 * zfactor * (1.0 + t);
    if (e == 0 && std::abs(push) > tol) fail(e, "theta . Z starts from 0");
    if (push < prev_push - tol) fail(e, "theta . Z nondecreasing");
    prev_push = std::max(prev_push, push);
  }
  return report;
}

void write_trace_csv(std::ostream& out, const EventTrace& trace) {
  out.precision(17);
  out << "t,class,kind";
  for (int i = 1; i <= trace.classes(); ++i) out << ",X" << i;
  for (int i = 1; i <= trace.classes(); ++i) out << ",B" << i;
  out << "\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    const auto& r = trace.event(e);
    out << r.t << "," << r.cls + 1 << "," << to_string(r.kind);
    for (long long v : trace.X(e)) out << "," << v;
    for (long long v : trace.B(e)) out << "," << v;
    out << "\n";
  }
}

}  // namespace mdq
