#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsched/model.hpp"

namespace lsched {

struct ColumnMap {
  int ts = 0;
  int job = 1;
  int instances = 2;
  bool skip_header = false;
};

// A job before placement and capacity generation: arrival (raw seconds, later
// rescaled to slots) plus one task count per trace entry.
struct JobDraft {
  JobId id = 0;
  double arrival = 0.0;
  std::vector<long long> group_counts;
  std::string key;
};

struct ParseResult {
  std::vector<JobDraft> jobs;
  std::vector<std::string> warnings;  // line-numbered rejected rows
};

struct PlacementConfig {
  int server_count = 100;
  double alpha = 0.0;  // Zipf skew; 0 = uniform
  int p_min = 8;
  int p_max = 12;
  std::uint64_t seed = 0;
};

struct CapacityConfig {
  int mu_min = 3;
  int mu_max = 5;
  std::uint64_t seed = 0;
};

struct SyntheticConfig {
  int job_count = 100;
  int groups_min = 1;
  int groups_max = 8;
  long long tasks_min = 10;
  long long tasks_max = 60;
  std::uint64_t seed = 0;
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline long long uniform_int(std::mt19937_64& rng, long long lo, long long hi) {
  return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Rank i in 1..M with probability proportional to 1/i^alpha.
inline int sample_zipf_rank(std::mt19937_64& rng, int M, double alpha,
                            const std::vector<double>& cumulative) {
  double u = unit_uniform(rng) * cumulative.back();
  auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
  int rank = static_cast<int>(it - cumulative.begin()) + 1;
  return std::min(rank, M);
}

inline std::vector<double> zipf_cumulative(int M, double alpha) {
  std::vector<double> c(static_cast<std::size_t>(M));
  double acc = 0.0;
  for (int i = 1; i <= M; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i), alpha);
    c[static_cast<std::size_t>(i - 1)] = acc;
  }
  return c;
}

inline void shuffle(std::vector<ServerId>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

// Each accepted row becomes one task group of its job; a job's arrival is the
// earliest timestamp among its rows. Jobs come out in first-appearance order.
inline ParseResult parse_trace(std::istream& in, const ColumnMap& columns,
                               std::size_t job_limit) {
  ParseResult out;
  std::map<std::string, std::size_t> index_of;
  std::string line;
  long long line_no = 0;
  int max_col = std::max({columns.ts, columns.job, columns.instances});
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && columns.skip_header) continue;
    if (line.empty()) continue;
    auto fields = detail::split_csv(line);
    if (static_cast<int>(fields.size()) <= max_col) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": missing column");
      continue;
    }
    double ts;
    long long instances;
    try {
      ts = std::stod(fields[static_cast<std::size_t>(columns.ts)]);
      instances = std::stoll(fields[static_cast<std::size_t>(columns.instances)]);
    } catch (const std::exception&) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": non-numeric field");
      continue;
    }
    if (instances < 1) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": zero task instances");
      continue;
    }
    const std::string& key = fields[static_cast<std::size_t>(columns.job)];
    auto it = index_of.find(key);
    if (it == index_of.end()) {
      if (out.jobs.size() >= job_limit) continue;
      JobDraft d;
      d.id = static_cast<JobId>(out.jobs.size()) + 1;
      d.arrival = ts;
      d.key = key;
      d.group_counts.push_back(instances);
      index_of.emplace(key, out.jobs.size());
      out.jobs.push_back(std::move(d));
    } else {
      JobDraft& d = out.jobs[it->second];
      d.arrival = std::min(d.arrival, ts);
      d.group_counts.push_back(instances);
    }
  }
  return out;
}

inline ParseResult parse_trace_file(const std::string& path, const ColumnMap& columns,
                                    std::size_t job_limit) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace file: " + path);
  return parse_trace(in, columns, job_limit);
}

inline std::vector<JobDraft> synthetic_jobs(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<JobDraft> jobs;
  jobs.reserve(static_cast<std::size_t>(cfg.job_count));
  for (int i = 0; i < cfg.job_count; ++i) {
    JobDraft d;
    d.id = i + 1;
    d.arrival = static_cast<double>(i);
    long long groups = detail::uniform_int(rng, cfg.groups_min, cfg.groups_max);
    for (long long g = 0; g < groups; ++g) {
      d.group_counts.push_back(detail::uniform_int(rng, cfg.tasks_min, cfg.tasks_max));
    }
    jobs.push_back(std::move(d));
  }
  return jobs;
}

// Rescale inter-arrival gaps by one factor so that offered work over the
// arrival horizon matches the target utilization; arrivals land on slots.
inline void scale_to_utilization(std::vector<JobDraft>& jobs, double target_util, int M,
                                 double mean_mu) {
  if (jobs.size() < 2) throw std::runtime_error("scale_to_utilization: need at least 2 jobs");
  if (!(target_util > 0.0 && target_util <= 1.0)) {
    throw std::runtime_error("scale_to_utilization: utilization must be in (0, 1]");
  }
  std::stable_sort(jobs.begin(), jobs.end(),
                   [](const JobDraft& a, const JobDraft& b) { return a.arrival < b.arrival; });
  double a0 = jobs.front().arrival;
  double horizon_old = jobs.back().arrival - a0;
  if (horizon_old <= 0.0) {
    throw std::runtime_error("scale_to_utilization: zero arrival horizon");
  }
  double work = 0.0;
  for (const auto& j : jobs) {
    long long total = 0;
    for (long long c : j.group_counts) total += c;
    work += std::ceil(static_cast<double>(total) / mean_mu);
  }
  double horizon_new = work / (static_cast<double>(M) * target_util);
  double scale = horizon_new / horizon_old;
  for (auto& j : jobs) {
    j.arrival = std::floor((j.arrival - a0) * scale);
  }
}

// Zipf-skewed anchor server plus p consecutive servers, wrapping modulo M.
inline std::vector<Job> gen_placement(const std::vector<JobDraft>& drafts,
                                      const PlacementConfig& cfg) {
  if (cfg.p_min < 1 || cfg.p_max < cfg.p_min || cfg.p_max > cfg.server_count) {
    throw std::runtime_error("gen_placement: invalid replication range");
  }
  std::mt19937_64 rng(cfg.seed);
  auto cumulative = detail::zipf_cumulative(cfg.server_count, cfg.alpha);
  std::vector<ServerId> perm(static_cast<std::size_t>(cfg.server_count));
  std::vector<Job> jobs;
  jobs.reserve(drafts.size());
  for (const auto& d : drafts) {
    Job job;
    job.id = d.id;
    job.arrival = static_cast<SlotTime>(d.arrival);
    std::map<std::vector<ServerId>, std::size_t> seen;
    for (long long count : d.group_counts) {
      for (int i = 0; i < cfg.server_count; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
      detail::shuffle(perm, rng);
      int rank = detail::sample_zipf_rank(rng, cfg.server_count, cfg.alpha, cumulative);
      ServerId anchor = perm[static_cast<std::size_t>(rank - 1)];
      long long p = detail::uniform_int(rng, cfg.p_min, cfg.p_max);
      std::vector<ServerId> servers;
      servers.reserve(static_cast<std::size_t>(p));
      for (long long i = 0; i < p; ++i) {
        servers.push_back(static_cast<ServerId>((anchor - 1 + i) % cfg.server_count + 1));
      }
      std::sort(servers.begin(), servers.end());
      auto it = seen.find(servers);
      if (it != seen.end()) {
        // identical available-server sets merge into one group
        job.groups[it->second].task_count += count;
        continue;
      }
      TaskGroup g;
      g.job_id = d.id;
      g.group_index = static_cast<int>(job.groups.size()) + 1;
      g.task_count = count;
      g.available_servers = std::move(servers);
      seen.emplace(g.available_servers, job.groups.size());
      job.groups.push_back(std::move(g));
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

inline CapacityProfile gen_capacity(int M, const std::vector<JobId>& job_ids,
                                    const CapacityConfig& cfg) {
  if (cfg.mu_min < 1 || cfg.mu_max < cfg.mu_min) {
    throw std::runtime_error("gen_capacity: invalid mu range");
  }
  CapacityProfile profile(cfg.mu_min);
  if (cfg.mu_min == cfg.mu_max) return profile;
  std::mt19937_64 rng(cfg.seed);
  for (JobId c : job_ids) {
    for (ServerId m = 1; m <= M; ++m) {
      profile.set(m, c, static_cast<int>(detail::uniform_int(rng, cfg.mu_min, cfg.mu_max)));
    }
  }
  return profile;
}

}  // namespace lsched
