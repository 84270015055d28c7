#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lsched {

using SlotTime = long long;  // non-negative time slots
using ServerId = int;        // dense 1..M
using JobId = long long;

inline long long ceil_div(long long a, long long b) {
  return (a + b - 1) / b;
}

// A maximal set of a job's tasks sharing one available-server set.
struct TaskGroup {
  JobId job_id = 0;
  int group_index = 0;  // 1-based within the job
  long long task_count = 0;
  std::vector<ServerId> available_servers;  // sorted ascending, non-empty
};

struct Job {
  JobId id = 0;
  SlotTime arrival = 0;
  std::vector<TaskGroup> groups;

  long long total_tasks() const {
    long long n = 0;
    for (const auto& g : groups) n += g.task_count;
    return n;
  }
};

// Tasks-per-slot profile, keyed by (server, job). Unset pairs fall back to a
// uniform default.
class CapacityProfile {
 public:
  explicit CapacityProfile(int uniform_mu = 1) : default_mu_(uniform_mu) {}

  void set(ServerId m, JobId c, int mu) { table_[key(m, c)] = mu; }

  int mu(ServerId m, JobId c) const {
    auto it = table_.find(key(m, c));
    return it == table_.end() ? default_mu_ : it->second;
  }

 private:
  static std::uint64_t key(ServerId m, JobId c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 32) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(c));
  }

  int default_mu_;
  std::unordered_map<std::uint64_t, int> table_;
};

// One backlog entry in a server queue. Entries of the same job are kept
// contiguous by the simulator.
struct QueueEntry {
  JobId job_id = 0;
  int group_index = 0;
  long long remaining_tasks = 0;
};

struct ClusterSnapshot {
  int server_count = 0;
  std::vector<std::vector<QueueEntry>> queues;  // indexed by m-1
  CapacityProfile capacity;

  ClusterSnapshot() = default;
  ClusterSnapshot(int m, CapacityProfile cap)
      : server_count(m), queues(static_cast<std::size_t>(m)), capacity(std::move(cap)) {}

  std::vector<QueueEntry>& queue(ServerId m) { return queues[static_cast<std::size_t>(m - 1)]; }
  const std::vector<QueueEntry>& queue(ServerId m) const {
    return queues[static_cast<std::size_t>(m - 1)];
  }
};

struct TaskAlloc {
  ServerId server = 0;
  SlotTime slots = 0;
  long long task_count = 0;
};

struct GroupAlloc {
  int group_index = 0;
  std::vector<TaskAlloc> allocs;
};

// Per-group allocation of slots and task counts, with the resulting estimated
// completion time.
struct Assignment {
  std::vector<GroupAlloc> groups;
  SlotTime phi = 0;
};

struct TaskSpec {
  long long task_id = 0;
  std::vector<ServerId> available_servers;
};

// Partition tasks into groups keyed by identical available-server sets, in
// first-appearance order.
inline std::vector<TaskGroup> group_tasks(JobId job_id, const std::vector<TaskSpec>& tasks) {
  std::vector<TaskGroup> groups;
  std::map<std::vector<ServerId>, std::size_t> index_of;
  for (const auto& t : tasks) {
    if (t.available_servers.empty()) {
      throw std::invalid_argument("task " + std::to_string(t.task_id) +
                                  " has no available server");
    }
    std::vector<ServerId> servers = t.available_servers;
    std::sort(servers.begin(), servers.end());
    servers.erase(std::unique(servers.begin(), servers.end()), servers.end());
    auto it = index_of.find(servers);
    if (it == index_of.end()) {
      TaskGroup g;
      g.job_id = job_id;
      g.group_index = static_cast<int>(groups.size()) + 1;
      g.task_count = 1;
      g.available_servers = std::move(servers);
      index_of.emplace(g.available_servers, groups.size());
      groups.push_back(std::move(g));
    } else {
      groups[it->second].task_count += 1;
    }
  }
  return groups;
}

// Returns std::nullopt when the assignment satisfies every invariant, or a
// description of the first violation found.
inline std::optional<std::string> validate_assignment(const Job& job,
                                                      const ClusterSnapshot& snapshot,
                                                      const Assignment& assignment) {
  std::map<int, const TaskGroup*> by_index;
  for (const auto& g : job.groups) by_index[g.group_index] = &g;

  std::map<int, long long> covered;
  for (const auto& ga : assignment.groups) {
    auto it = by_index.find(ga.group_index);
    if (it == by_index.end()) {
      return "unknown group " + std::to_string(ga.group_index);
    }
    const TaskGroup& g = *it->second;
    for (const auto& a : ga.allocs) {
      if (a.server < 1 || a.server > snapshot.server_count) {
        return "locality: group " + std::to_string(ga.group_index) + " uses server " +
               std::to_string(a.server) + " outside the cluster";
      }
      if (!std::binary_search(g.available_servers.begin(), g.available_servers.end(), a.server)) {
        return "locality: group " + std::to_string(ga.group_index) + " uses server " +
               std::to_string(a.server);
      }
      if (a.task_count < 0 || a.slots < 0) {
        return "negative allocation in group " + std::to_string(ga.group_index);
      }
      if (a.task_count >= 1 && a.slots < 1) {
        return "slots: group " + std::to_string(ga.group_index) + " server " +
               std::to_string(a.server) + " has tasks but no slots";
      }
      long long cap = a.slots * snapshot.capacity.mu(a.server, job.id);
      if (a.task_count > cap) {
        return "capacity: group " + std::to_string(ga.group_index) + " server " +
               std::to_string(a.server) + " holds " + std::to_string(a.task_count) +
               " tasks in " + std::to_string(a.slots) + " slots";
      }
      covered[ga.group_index] += a.task_count;
    }
  }
  for (const auto& g : job.groups) {
    long long got = 0;
    if (auto it = covered.find(g.group_index); it != covered.end()) got = it->second;
    if (got != g.task_count) {
      return "group coverage: group " + std::to_string(g.group_index) + " assigns " +
             std::to_string(got) + " of " + std::to_string(g.task_count) + " tasks";
    }
  }
  return std::nullopt;
}

}  // namespace lsched
