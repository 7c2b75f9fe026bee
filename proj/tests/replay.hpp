#pragma once

// Drives a Policy from a synthetic or recorded state history, outside the
// simulator. The driver integrates the allocation itself, so `busy` always
// matches what the policy asked for.

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "mdq/policies.hpp"
#include "mdq/sim.hpp"

namespace replay {

struct State {
  std::vector<long long> X, A, D;
};

// state(t, busy) -> counts in force at t (right values)
using StateFn = std::function<State(double t, const std::vector<double>& busy)>;

struct Result {
  std::vector<double> times;                 // decision times
  std::vector<std::vector<long long>> B;     // allocation chosen at each decision time
  std::vector<double> busy_at_end;
  // int B_i over [a, b) for the piecewise-constant allocation
  double integral(int i, double a, double b) const {
    double total = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double lo = std::max(a, times[k]);
      const double hi = std::min(b, k + 1 < times.size() ? times[k + 1] : std::numeric_limits<double>::infinity());
      if (hi > lo) total += static_cast<double>(B[k][static_cast<std::size_t>(i)]) * (hi - lo);
    }
    return total;
  }
};

inline Result run(mdq::Policy& policy, int classes, long long servers, double horizon, const StateFn& state,
                  std::vector<double> extra_times = {}) {
  std::sort(extra_times.begin(), extra_times.end());
  Result out;
  std::vector<double> busy(static_cast<std::size_t>(classes), 0.0);
  std::vector<long long> B(static_cast<std::size_t>(classes), 0);
  double t = 0.0;
  while (t < horizon) {
    const State s = state(t, busy);
    mdq::SystemView view;
    view.t = t;
    view.servers = servers;
    view.X = s.X;
    view.A = s.A;
    view.D = s.D;
    view.B = B;
    view.busy = busy;
    std::vector<long long> next(B.size(), 0);
    policy.allocate(view, next);
    B = next;
    out.times.push_back(t);
    out.B.push_back(B);
    double t_next = std::min(policy.next_trigger(t), horizon);
    const auto it = std::upper_bound(extra_times.begin(), extra_times.end(), t);
    if (it != extra_times.end()) t_next = std::min(t_next, *it);
    for (std::size_t i = 0; i < busy.size(); ++i) busy[i] += static_cast<double>(B[i]) * (t_next - t);
    t = t_next;
  }
  out.busy_at_end = busy;
  return out;
}

// State function reading counts off a recorded trace (the state at the last entry <= t).
inline StateFn from_trace(const mdq::EventTrace& trace) {
  return [&trace](double t, const std::vector<double>&) {
    const std::size_t e = trace.index_at(t);
    const auto X = trace.X(e), A = trace.A(e), D = trace.D(e);
    return State{{X.begin(), X.end()}, {A.begin(), A.end()}, {D.begin(), D.end()}};
  };
}

inline std::vector<double> event_times(const mdq::EventTrace& trace) {
  std::vector<double> t;
  for (const auto& ev : trace.events()) t.push_back(ev.t);
  return t;
}

}  // namespace replay
