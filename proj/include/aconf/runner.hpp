#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "aconf/paramspace.hpp"
#include "aconf/scenario.hpp"

namespace aconf {

enum class RunStatus { sat, unsat, success, timeout, crashed, memout, wrong_answer };

std::string to_string(RunStatus s);
std::optional<RunStatus> parse_status(std::string_view s);

struct RunOutcome {
  RunStatus status = RunStatus::crashed;
  double runtime = 0.0;
  /// Terminated at a cutoff below the scenario's maximum: the runtime is only a lower bound.
  bool capped = false;

  bool solved() const {
    return status == RunStatus::sat || status == RunStatus::unsat || status == RunStatus::success;
  }
  bool operator==(const RunOutcome&) const = default;
};

struct CostMetric {
  int k = 10;
  double cutoff = 300.0;  // kappa_max
};

/// PAR-k cost of one run. Capped timeouts return their runtime, which is a
/// lower bound on the true cost (see is_lower_bound).
double penalized_cost(const RunOutcome& outcome, double kappa_max, int k);
inline double penalized_cost(const RunOutcome& outcome, const CostMetric& m) {
  return penalized_cost(outcome, m.cutoff, m.k);
}
inline bool is_lower_bound(const RunOutcome& outcome) {
  return outcome.capped && outcome.status == RunStatus::timeout;
}

struct RunSpec {
  Configuration config;
  std::string instance_id;
  std::uint64_t seed = 0;
  double cutoff_seconds = 300.0;
  int memory_limit_mb = 3072;
};

/// Shared between a dispatcher and an executing run. The cutoff may be lowered
/// while the run executes; cancellation ends the run as a capped timeout.
struct RunControl {
  std::atomic<double> cutoff{std::numeric_limits<double>::infinity()};
  std::atomic<bool> cancelled{false};
};

/// Something that can execute one target-algorithm run. Implementations must
/// be thread-safe.
class Target {
 public:
  virtual ~Target() = default;
  /// `space` is the space `spec.config` lives in. Target misbehaviour is
  /// reported through the outcome, never thrown.
  virtual RunOutcome run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const = 0;
  /// In-process targets report runtimes on a virtual clock and complete instantly.
  virtual bool in_process() const = 0;
};

/// Parses the last "Result for configurator: STATUS, runtime, ..." line and
/// cross-checks the reported status against the expected one.
RunOutcome interpret_wrapper_output(std::string_view raw, ExpectedStatus expected);

/// Wrapper command line for one run, following the call convention
/// `<cmd> <instance> <info> <cutoff> -1 <seed> -<name> '<value>' ...`.
std::string wrapper_command(const std::string& target_command, const std::string& instance_info,
                            const ParameterSpace& space, const RunSpec& spec);

/// Runs a wrapper executable under wall-clock and memory supervision.
class ProcessTarget : public Target {
 public:
  static constexpr double kGraceSeconds = 2.0;

  /// Standard error of each run goes to `log_dir` when non-empty.
  ProcessTarget(const Scenario& scenario, std::string log_dir = {});

  RunOutcome run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const override;
  bool in_process() const override { return false; }

 private:
  std::string command_;
  std::string instance_info_;
  std::string execdir_;
  double kappa_max_;
  InstanceSet instances_;
  std::string log_dir_;
  mutable std::atomic<std::uint64_t> run_counter_{0};
};

/// Blocking single run; thread-safe.
RunOutcome execute_run(const Target& target, const ParameterSpace& space, const RunSpec& spec,
                       RunControl* control = nullptr);

/// Fixed-width worker pool. Results come back in completion order with the
/// submitting ticket attached.
class RunPool {
 public:
  struct Completed {
    std::uint64_t ticket;
    RunSpec spec;
    RunOutcome outcome;
  };

  RunPool(const Target& target, const ParameterSpace& space, int workers);
  ~RunPool();
  RunPool(const RunPool&) = delete;
  RunPool& operator=(const RunPool&) = delete;

  std::uint64_t submit(RunSpec spec);
  /// Lowers the cutoff of a queued or running job.
  void shrink_cutoff(std::uint64_t ticket, double cutoff);
  void cancel(std::uint64_t ticket);
  /// Blocks until some submitted job finishes.
  Completed wait_next();
  std::size_t outstanding() const;

 private:
  struct Job {
    std::uint64_t ticket;
    RunSpec spec;
    std::shared_ptr<RunControl> control;
  };
  void worker_loop();

  const Target& target_;
  const ParameterSpace& space_;
  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable done_cv_;
  std::deque<Job> queue_;
  std::vector<std::pair<std::uint64_t, std::shared_ptr<RunControl>>> active_;
  std::deque<Completed> done_;
  std::size_t outstanding_ = 0;
  std::uint64_t next_ticket_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace aconf
