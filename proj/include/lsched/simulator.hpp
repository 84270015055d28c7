#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsched/assigners.hpp"
#include "lsched/model.hpp"
#include "lsched/reorder.hpp"

namespace lsched {

enum class Algo { nlip, obta, wf, rd, ocwf, ocwf_acc };

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::nlip: return "nlip";
    case Algo::obta: return "obta";
    case Algo::wf: return "wf";
    case Algo::rd: return "rd";
    case Algo::ocwf: return "ocwf";
    case Algo::ocwf_acc: return "ocwf-acc";
  }
  return "?";
}

inline std::optional<Algo> parse_algo(std::string_view name) {
  if (name == "nlip") return Algo::nlip;
  if (name == "obta") return Algo::obta;
  if (name == "wf") return Algo::wf;
  if (name == "rd") return Algo::rd;
  if (name == "ocwf") return Algo::ocwf;
  if (name == "ocwf-acc" || name == "ocwf_acc") return Algo::ocwf_acc;
  return std::nullopt;
}

struct SimConfig {
  int server_count = 0;
  Algo algo = Algo::wf;
  std::uint64_t rd_seed = 0;
};

struct JctRecord {
  JobId job_id = 0;
  SlotTime arrival = 0;
  SlotTime completion = 0;
  SlotTime jct = 0;
  double decision_overhead_us = 0.0;
};

// Monotonic-clock timing wrapper around a decision call.
template <class F>
auto measure_overhead(F&& thunk) {
  auto t0 = std::chrono::steady_clock::now();
  auto value = std::forward<F>(thunk)();
  auto t1 = std::chrono::steady_clock::now();
  double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
  return std::make_pair(std::move(value), us);
}

namespace detail {

// Slot-granular engine state. A slot is never split across jobs: each server
// spends whole slots on the job at its queue head.
class Simulation {
 public:
  Simulation(const SimConfig& cfg, const std::vector<Job>& jobs, const CapacityProfile& capacity)
      : cfg_(cfg), jobs_(&jobs), snapshot_(cfg.server_count, capacity) {
    validate();
    progress_.resize(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      progress_[i].total = jobs[i].total_tasks();
      progress_[i].per_group.assign(jobs[i].groups.size(), 0);
      index_of_[jobs[i].id] = i;
    }
  }

  std::vector<JctRecord> run() {
    std::size_t next = 0;
    while (next < jobs_->size()) {
      SlotTime t = (*jobs_)[next].arrival;
      if (clock_ < t && queues_empty()) clock_ = t;
      while (clock_ < t) advance_slot();
      while (next < jobs_->size() && (*jobs_)[next].arrival == t) {
        handle_arrival(next);
        ++next;
      }
    }
    while (incomplete_ > 0) advance_slot();

    std::vector<JctRecord> records;
    records.reserve(jobs_->size());
    long long processed = 0;
    for (std::size_t i = 0; i < jobs_->size(); ++i) {
      const Job& j = (*jobs_)[i];
      const JobProgress& p = progress_[i];
      processed += p.done;
      records.push_back({j.id, j.arrival, p.completion, p.completion - j.arrival, p.overhead_us});
    }
    if (processed != issued_done_check()) {
      throw std::logic_error("task conservation violated");
    }
    return records;
  }

  void advance_slot() {
    for (ServerId m = 1; m <= cfg_.server_count; ++m) {
      auto& q = snapshot_.queue(m);
      if (q.empty()) continue;
      JobId h = q.front().job_id;
      long long cap = snapshot_.capacity.mu(m, h);
      while (cap > 0 && !q.empty() && q.front().job_id == h) {
        QueueEntry& e = q.front();
        long long take = std::min(e.remaining_tasks, cap);
        e.remaining_tasks -= take;
        cap -= take;
        record_processed(h, e.group_index, take);
        if (e.remaining_tasks == 0) q.erase(q.begin());
      }
    }
    ++clock_;
    for (std::size_t i : touched_) {
      JobProgress& p = progress_[i];
      if (p.done == p.total && p.completion < 0) {
        p.completion = clock_;
        --incomplete_;
      }
    }
    touched_.clear();
  }

  SlotTime clock() const { return clock_; }
  const ClusterSnapshot& snapshot() const { return snapshot_; }

 private:
  struct JobProgress {
    long long total = 0;
    long long done = 0;
    std::vector<long long> per_group;  // processed, indexed by group position
    SlotTime completion = -1;
    double overhead_us = 0.0;
  };

  void validate() const {
    if (cfg_.server_count < 1) throw std::runtime_error("simulator: no servers");
    SlotTime prev = 0;
    for (const Job& j : *jobs_) {
      if (j.arrival < prev) throw std::runtime_error("simulator: jobs not sorted by arrival");
      prev = j.arrival;
      if (j.groups.empty()) {
        throw std::runtime_error("malformed job " + std::to_string(j.id) + ": no groups");
      }
      for (const auto& g : j.groups) {
        if (g.task_count < 1 || g.available_servers.empty()) {
          throw std::runtime_error("malformed job " + std::to_string(j.id) + " group " +
                                   std::to_string(g.group_index));
        }
        for (ServerId m : g.available_servers) {
          if (m < 1 || m > cfg_.server_count) {
            throw std::runtime_error("malformed job " + std::to_string(j.id) +
                                     ": server out of range");
          }
        }
      }
    }
  }

  bool queues_empty() const {
    for (const auto& q : snapshot_.queues) {
      if (!q.empty()) return false;
    }
    return true;
  }

  long long issued_done_check() const {
    long long total = 0;
    for (const auto& p : progress_) total += p.total;
    return total;
  }

  void record_processed(JobId job, int group_index, long long count) {
    std::size_t i = index_of_.at(job);
    JobProgress& p = progress_[i];
    p.done += count;
    p.per_group[static_cast<std::size_t>(group_index - 1)] += count;
    touched_.push_back(i);
  }

  void push_assignment(const Job& job, const Assignment& a) {
    for (const auto& ga : a.groups) {
      for (const auto& al : ga.allocs) {
        if (al.task_count > 0) {
          snapshot_.queue(al.server).push_back({job.id, ga.group_index, al.task_count});
        }
      }
    }
  }

  OutstandingJob remaining_tasks(std::size_t i) const {
    const Job& j = (*jobs_)[i];
    const JobProgress& p = progress_[i];
    OutstandingJob o;
    o.id = j.id;
    o.arrival = j.arrival;
    for (std::size_t g = 0; g < j.groups.size(); ++g) {
      long long rem = j.groups[g].task_count - p.per_group[g];
      if (rem > 0) {
        TaskGroup tg = j.groups[g];
        tg.task_count = rem;
        o.groups.push_back(std::move(tg));
      }
    }
    return o;
  }

  void handle_arrival(std::size_t i) {
    const Job& job = (*jobs_)[i];
    ++incomplete_;
    if (cfg_.algo == Algo::ocwf || cfg_.algo == Algo::ocwf_acc) {
      std::vector<OutstandingJob> outstanding;
      for (std::size_t k = 0; k <= i; ++k) {
        if (progress_[k].done < progress_[k].total) outstanding.push_back(remaining_tasks(k));
      }
      auto [result, us] = measure_overhead([&] {
        return ocwf_reorder(outstanding, cfg_.server_count, snapshot_.capacity,
                            cfg_.algo == Algo::ocwf_acc);
      });
      progress_[i].overhead_us = us;
      for (auto& q : snapshot_.queues) q.clear();
      for (std::size_t pos = 0; pos < result.order.size(); ++pos) {
        std::size_t k = index_of_.at(result.order[pos]);
        push_assignment((*jobs_)[k], result.assignments[pos]);
      }
    } else {
      auto [assignment, us] = measure_overhead([&] {
        switch (cfg_.algo) {
          case Algo::nlip: return nlip_assign(job, snapshot_);
          case Algo::obta: return obta_assign(job, snapshot_);
          case Algo::rd: return rd_assign(job, snapshot_, cfg_.rd_seed + i);
          case Algo::wf:
          default: return wf_assign(job, snapshot_).first;
        }
      });
      progress_[i].overhead_us = us;
      push_assignment(job, assignment);
    }
  }

  SimConfig cfg_;
  const std::vector<Job>* jobs_;
  ClusterSnapshot snapshot_;
  std::vector<JobProgress> progress_;
  std::unordered_map<JobId, std::size_t> index_of_;
  std::vector<std::size_t> touched_;
  SlotTime clock_ = 0;
  long long incomplete_ = 0;
};

}  // namespace detail

// Drive the full event loop for a sorted job list and return one record per
// job, in input order.
inline std::vector<JctRecord> run(const SimConfig& cfg, const std::vector<Job>& jobs,
                                  const CapacityProfile& capacity) {
  detail::Simulation sim(cfg, jobs, capacity);
  return sim.run();
}

}  // namespace lsched
