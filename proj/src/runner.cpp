#include "aconf/runner.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace aconf {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::sat:
      return "SAT";
    case RunStatus::unsat:
      return "UNSAT";
    case RunStatus::success:
      return "SUCCESS";
    case RunStatus::timeout:
      return "TIMEOUT";
    case RunStatus::crashed:
      return "CRASHED";
    case RunStatus::memout:
      return "MEMOUT";
    case RunStatus::wrong_answer:
      return "WRONG_ANSWER";
  }
  return "CRASHED";
}

std::optional<RunStatus> parse_status(std::string_view s) {
  if (s == "SAT" || s == "SATISFIABLE") return RunStatus::sat;
  if (s == "UNSAT" || s == "UNSATISFIABLE") return RunStatus::unsat;
  if (s == "SUCCESS") return RunStatus::success;
  if (s == "TIMEOUT") return RunStatus::timeout;
  if (s == "CRASHED") return RunStatus::crashed;
  if (s == "MEMOUT") return RunStatus::memout;
  if (s == "WRONG_ANSWER") return RunStatus::wrong_answer;
  return std::nullopt;
}

double penalized_cost(const RunOutcome& outcome, double kappa_max, int k) {
  if (outcome.solved()) return std::clamp(outcome.runtime, 0.0, kappa_max);
  if (is_lower_bound(outcome)) return std::clamp(outcome.runtime, 0.0, kappa_max);
  return static_cast<double>(k) * kappa_max;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') out += "'\\''";
    else out += ch;
  }
  out += '\'';
  return out;
}

// Sum of resident set sizes of every process in the group, in MB.
double group_rss_mb(pid_t pgid) {
  static const long page_kb = sysconf(_SC_PAGESIZE) / 1024;
  double total_kb = 0;
  DIR* dir = opendir("/proc");
  if (dir == nullptr) return 0;
  while (auto* ent = readdir(dir)) {
    if (!std::isdigit(static_cast<unsigned char>(ent->d_name[0]))) continue;
    std::ifstream stat(std::string("/proc/") + ent->d_name + "/stat");
    std::string content;
    if (!std::getline(stat, content)) continue;
    auto close = content.rfind(')');
    if (close == std::string::npos) continue;
    std::istringstream rest(content.substr(close + 2));
    std::string state;
    long ppid = 0, pgrp = 0;
    rest >> state >> ppid >> pgrp;
    if (pgrp != pgid) continue;
    std::ifstream statm(std::string("/proc/") + ent->d_name + "/statm");
    long size = 0, resident = 0;
    if (statm >> size >> resident) total_kb += static_cast<double>(resident * page_kb);
  }
  closedir(dir);
  return total_kb / 1024.0;
}

}  // namespace

RunOutcome interpret_wrapper_output(std::string_view raw, ExpectedStatus expected) {
  static constexpr std::string_view kTag = "Result for configurator:";
  std::optional<std::string> last;
  std::size_t start = 0;
  while (start < raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    auto line = raw.substr(start, end - start);
    if (auto pos = line.find(kTag); pos != std::string_view::npos) last = std::string(line.substr(pos + kTag.size()));
    start = end + 1;
  }
  RunOutcome crashed{RunStatus::crashed, 0.0, false};
  if (!last) return crashed;

  std::vector<std::string> fields;
  std::istringstream in(*last);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (fields.size() < 2) return crashed;
  auto status = parse_status(fields[0]);
  if (!status) return crashed;
  double runtime = 0;
  try {
    std::size_t used = 0;
    runtime = std::stod(fields[1], &used);
    if (used != fields[1].size()) return crashed;
  } catch (const std::exception&) {
    return crashed;
  }
  if (!std::isfinite(runtime) || runtime < 0) return crashed;

  RunOutcome out{*status, runtime, false};
  if ((out.status == RunStatus::sat && expected == ExpectedStatus::unsat) ||
      (out.status == RunStatus::unsat && expected == ExpectedStatus::sat))
    out.status = RunStatus::wrong_answer;
  return out;
}

std::string wrapper_command(const std::string& target_command, const std::string& instance_info,
                            const ParameterSpace& space, const RunSpec& spec) {
  std::ostringstream cmd;
  cmd << target_command << ' ' << shell_quote(spec.instance_id) << ' ' << shell_quote(instance_info) << ' '
      << format_number(spec.cutoff_seconds) << " -1 " << spec.seed;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (is_inactive(spec.config[i])) continue;
    const auto& p = space.parameters()[i];
    cmd << " -" << p.name << ' ' << shell_quote(p.format(spec.config[i]));
  }
  return cmd.str();
}

ProcessTarget::ProcessTarget(const Scenario& scenario, std::string log_dir)
    : command_(scenario.target_command),
      instance_info_(scenario.instance_info),
      execdir_(scenario.execdir),
      kappa_max_(scenario.cutoff_seconds),
      instances_(scenario.train),
      log_dir_(std::move(log_dir)) {
  instances_.instances.insert(instances_.instances.end(), scenario.test.instances.begin(),
                              scenario.test.instances.end());
  if (!log_dir_.empty()) std::filesystem::create_directories(log_dir_);

  std::istringstream words(command_);
  std::string program;
  words >> program;
  namespace fs = std::filesystem;
  bool found = false;
  if (program.find('/') != std::string::npos) {
    fs::path p = fs::path(program).is_absolute() ? fs::path(program) : fs::path(execdir_) / program;
    found = access(p.c_str(), X_OK) == 0;
  } else if (const char* path = std::getenv("PATH")) {
    std::istringstream dirs(path);
    std::string dir;
    while (!found && std::getline(dirs, dir, ':'))
      found = !dir.empty() && access((fs::path(dir) / program).c_str(), X_OK) == 0;
  }
  if (!found) throw Error("target wrapper '" + program + "' not found or not executable");
}

RunOutcome ProcessTarget::run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const {
  using Clock = std::chrono::steady_clock;
  const std::string cmd = wrapper_command(command_, instance_info_, space, spec);
  const auto* inst = instances_.find(spec.instance_id);
  const ExpectedStatus expected = inst ? inst->expected : ExpectedStatus::unknown;
  const double base_cutoff = std::min(spec.cutoff_seconds, kappa_max_);

  std::string err_path = "/dev/null";
  if (!log_dir_.empty()) {
    err_path = (std::filesystem::path(log_dir_) / ("run-" + std::to_string(run_counter_.fetch_add(1)) + ".err")).string();
  }

  int out_pipe[2];
  if (pipe(out_pipe) != 0) throw Error(std::string("pipe failed: ") + std::strerror(errno));

  pid_t pid = fork();
  if (pid < 0) {
    close(out_pipe[0]);
    close(out_pipe[1]);
    throw Error(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    int err_fd = open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (err_fd >= 0) {
      dup2(err_fd, STDERR_FILENO);
      close(err_fd);
    }
    if (chdir(execdir_.c_str()) != 0) _exit(127);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(out_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);

  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  std::string output;
  char buf[4096];
  auto drain = [&] {
    while (true) {
      ssize_t n = read(out_pipe[0], buf, sizeof buf);
      if (n > 0) output.append(buf, static_cast<std::size_t>(n));
      else break;
    }
  };

  enum class Stop { none, timeout, cancelled, memout };
  Stop stop = Stop::none;
  double stop_time = 0;
  double stop_cutoff = base_cutoff;
  double last_mem_check = 0;
  bool term_sent = false, kill_sent = false;
  int wstatus = 0;
  bool exited = false;

  while (!exited) {
    pollfd pfd{out_pipe[0], POLLIN, 0};
    poll(&pfd, 1, 5);
    drain();
    pid_t r = waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) {
      exited = true;
      break;
    }
    const double now = elapsed();
    double cutoff = base_cutoff;
    if (control != nullptr) cutoff = std::min(cutoff, control->cutoff.load());
    if (stop == Stop::none) {
      if (control != nullptr && control->cancelled.load()) {
        stop = Stop::cancelled;
        stop_time = now;
      } else if (now > cutoff) {
        stop = Stop::timeout;
        stop_time = now;
        stop_cutoff = cutoff;
      } else if (now - last_mem_check > 0.1) {
        last_mem_check = now;
        if (group_rss_mb(pid) > spec.memory_limit_mb) {
          stop = Stop::memout;
          stop_time = now;
        }
      }
    }
    if (stop != Stop::none) {
      if (!term_sent) {
        // Memory violations and cancellations are not negotiable.
        kill(-pid, stop == Stop::timeout ? SIGTERM : SIGKILL);
        term_sent = true;
      } else if (!kill_sent && now - stop_time > kGraceSeconds) {
        kill(-pid, SIGKILL);
        kill_sent = true;
      }
    }
  }
  // Orphaned grandchildren may still hold the pipe open.
  kill(-pid, SIGKILL);
  drain();
  close(out_pipe[0]);
  const double wall = elapsed();

  switch (stop) {
    case Stop::cancelled:
      return {RunStatus::timeout, std::min(stop_time, base_cutoff), true};
    case Stop::memout:
      return {RunStatus::memout, std::min(stop_time, base_cutoff), false};
    case Stop::timeout:
      return {RunStatus::timeout, stop_cutoff, stop_cutoff < kappa_max_};
    case Stop::none:
      break;
  }

  RunOutcome out = interpret_wrapper_output(output, expected);
  if (out.status == RunStatus::crashed) out.runtime = std::min(wall, base_cutoff);
  if (out.status == RunStatus::timeout || out.runtime > base_cutoff) {
    out.status = RunStatus::timeout;
    out.runtime = base_cutoff;
    out.capped = base_cutoff < kappa_max_;
  }
  return out;
}

RunOutcome execute_run(const Target& target, const ParameterSpace& space, const RunSpec& spec, RunControl* control) {
  return target.run(space, spec, control);
}

// ---------------------------------------------------------------------------
// RunPool

RunPool::RunPool(const Target& target, const ParameterSpace& space, int workers) : target_(target), space_(space) {
  for (int i = 0; i < std::max(1, workers); ++i) threads_.emplace_back([this] { worker_loop(); });
}

RunPool::~RunPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    for (auto& [ticket, control] : active_) control->cancelled = true;
  }
  work_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

std::uint64_t RunPool::submit(RunSpec spec) {
  std::lock_guard lock(mu_);
  auto control = std::make_shared<RunControl>();
  control->cutoff = spec.cutoff_seconds;
  std::uint64_t ticket = next_ticket_++;
  queue_.push_back({ticket, std::move(spec), control});
  active_.emplace_back(ticket, control);
  ++outstanding_;
  work_cv_.notify_one();
  return ticket;
}

void RunPool::shrink_cutoff(std::uint64_t ticket, double cutoff) {
  std::lock_guard lock(mu_);
  for (auto& [t, control] : active_) {
    if (t != ticket) continue;
    double cur = control->cutoff.load();
    if (cutoff < cur) control->cutoff = cutoff;
  }
}

void RunPool::cancel(std::uint64_t ticket) {
  std::lock_guard lock(mu_);
  for (auto& [t, control] : active_)
    if (t == ticket) control->cancelled = true;
}

RunPool::Completed RunPool::wait_next() {
  std::unique_lock lock(mu_);
  if (outstanding_ == 0 && done_.empty()) throw Error("RunPool::wait_next with nothing outstanding");
  done_cv_.wait(lock, [&] { return !done_.empty(); });
  Completed c = std::move(done_.front());
  done_.pop_front();
  return c;
}

std::size_t RunPool::outstanding() const {
  std::lock_guard lock(mu_);
  return outstanding_;
}

void RunPool::worker_loop() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(mu_);
      work_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    RunOutcome outcome;
    if (job.control->cancelled.load()) {
      outcome = {RunStatus::timeout, 0.0, true};
    } else {
      RunSpec effective = job.spec;
      effective.cutoff_seconds = std::min(effective.cutoff_seconds, job.control->cutoff.load());
      outcome = target_.run(space_, effective, job.control.get());
    }
    {
      std::lock_guard lock(mu_);
      active_.erase(std::remove_if(active_.begin(), active_.end(), [&](auto& a) { return a.first == job.ticket; }),
                    active_.end());
      --outstanding_;
      done_.push_back({job.ticket, std::move(job.spec), outcome});
    }
    done_cv_.notify_all();
  }
}

}  // namespace aconf
