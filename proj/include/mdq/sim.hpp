#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mdq/families.hpp"
#include "mdq/game.hpp"
#include "mdq/paths.hpp"
#include "mdq/policies.hpp"
#include "mdq/scaling.hpp"

namespace mdq {

enum class EventKind { arrival, departure, reallocation };

const char* to_string(EventKind kind);

struct EventRecord {
  double t = 0.0;
  int cls = -1;  // -1 for reallocations
  EventKind kind = EventKind::reallocation;
};

/// Exact record of one run. Entry 0 is the initial decision at t = 0; each
/// entry stores the state right after the event. The state is constant on
/// [t_e, t_{e+1}).
class EventTrace {
 public:
  EventTrace(int classes, long long servers, double horizon);

  int classes() const { return classes_; }
  long long servers() const { return servers_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return events_.size(); }

  const EventRecord& event(std::size_t e) const { return events_[e]; }
  const std::vector<EventRecord>& events() const { return events_; }
  std::span<const long long> X(std::size_t e) const { return row(X_, e); }
  std::span<const long long> B(std::size_t e) const { return row(B_, e); }
  std::span<const long long> A(std::size_t e) const { return row(A_, e); }
  std::span<const long long> D(std::size_t e) const { return row(D_, e); }
  std::span<const double> busy(std::size_t e) const;

  /// Last entry with time <= t.
  std::size_t index_at(double t) const;
  /// Last entry with time < t (the left limit); entry 0 when t <= 0.
  std::size_t index_before(double t) const;

  void push(const EventRecord& rec, std::span<const long long> X, std::span<const long long> B,
            std::span<const long long> A, std::span<const long long> D, std::span<const double> busy);

  std::size_t count(EventKind kind) const;

 private:
  std::span<const long long> row(const std::vector<long long>& v, std::size_t e) const {
    return {v.data() + e * static_cast<std::size_t>(classes_), static_cast<std::size_t>(classes_)};
  }

  int classes_;
  long long servers_;
  double horizon_;
  std::vector<EventRecord> events_;
  std::vector<long long> X_, B_, A_, D_;
  std::vector<double> busy_;
};

struct SimOptions {
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::vector<long long> X0;                 // initial counts per class
  std::size_t max_events = 200'000'000;      // runaway guard
};

/// Next-event simulation. Arrivals are renewal streams with mean-one
/// inter-arrival times scaled by 1/lambda^n_i; class-i completions race at
/// rate mu^n_i B_i. Throws InfeasibleAllocation when the policy breaks
/// B_i <= X_i or sum B_i <= N.
EventTrace simulate(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families, Policy& policy,
                    const SimOptions& options);
EventTrace simulate(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families,
                    const PolicySpec& policy, const GameSpec& game, const SimOptions& options);

enum class PayoffTarget { X, Q };

/// Runs one replication and returns int_0^T h(Y~) + g(Y~(T)) with Y = X or Q
/// without storing the trace.
double simulate_payoff(const ScalingScheme& scheme, std::span<const InterArrivalFamily> families, Policy& policy,
                       const SimOptions& options, const CostFunctions& costs, PayoffTarget target);

/// Scaled processes at event times plus left-limit samples on a grid.
struct ScaledTrace {
  int classes = 0;
  std::vector<double> times;
  std::vector<double> X_tilde, Q_tilde, Z;  // row-major, one row per trace entry
  std::vector<double> theta_n;
  SampledPath X_grid = SampledPath(TimeGrid(1.0, 1), 1);
  SampledPath Q_grid = SampledPath(TimeGrid(1.0, 1), 1);
  SampledPath Z_grid = SampledPath(TimeGrid(1.0, 1), 1);

  /// theta^n . Z at entry e.
  double workload_push(std::size_t e) const;
};

ScaledTrace scale_trace(const EventTrace& trace, const ScalingScheme& scheme, const TimeGrid& grid);

/// int_0^T h + g(end) for a right-continuous step path given at `times`
/// (row-major values, `dim` per row), integrated exactly up to `horizon`.
double step_payoff(std::span<const double> times, std::span<const double> values, int dim, double horizon,
                   const CostFunctions& costs);

double payoff(const EventTrace& trace, const ScalingScheme& scheme, const CostFunctions& costs,
              PayoffTarget target = PayoffTarget::X);
double payoff(const ScaledTrace& scaled, double horizon, const CostFunctions& costs,
              PayoffTarget target = PayoffTarget::X);

struct ConservationReport {
  std::size_t events_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks X = Q + B, N = I + sum B, X = X(0) + A - D, 0 <= B <= X, sum B <= N
/// in integers and theta^n . Z nondecreasing from 0 at every entry.
ConservationReport check_conservation(const EventTrace& trace, const ScalingScheme& scheme);

/// CSV: t,class,kind,X1..XI,B1..BI (class is 1-based, 0 for reallocations).
void write_trace_csv(std::ostream& out, const EventTrace& trace);

}  // namespace mdq
