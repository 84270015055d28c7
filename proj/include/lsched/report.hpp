#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsched/model.hpp"
#include "lsched/simulator.hpp"
#include "lsched/workload.hpp"

namespace lsched {

struct ExperimentConfig {
  std::vector<Algo> algorithms;
  int server_count = 100;
  std::vector<double> alphas{2.0};
  std::vector<double> utils{0.5};
  int p_min = 8;
  int p_max = 12;
  int mu_min = 3;
  int mu_max = 5;
  std::vector<std::uint64_t> seeds{1};
  std::string trace_path;  // empty in synthetic mode
  ColumnMap columns;
  std::size_t job_limit = 250;
  bool synthetic = false;
  SyntheticConfig synth;
  std::string out_dir;  // empty: no files written
};

struct JobRow {
  JobId job_id;
  std::string algorithm;
  double alpha;
  double util;
  std::uint64_t seed;
  SlotTime arrival;
  SlotTime completion;
  SlotTime jct;
  double overhead_us;
};

struct CellSummary {
  std::string algorithm;
  double alpha = 0.0;
  double util = 0.0;
  long long job_count = 0;
  double avg_jct = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  std::vector<std::pair<double, double>> cdf;
  double mean_overhead_us = 0.0;
  double total_overhead_us = 0.0;
};

struct Summary {
  std::vector<CellSummary> cells;
  std::vector<JobRow> rows;
};

// Empirical CDF at sorted distinct values.
inline std::vector<std::pair<double, double>> cdf(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cdf: empty input");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 == n || values[i + 1] != values[i]) {
      out.emplace_back(values[i], static_cast<double>(i + 1) / static_cast<double>(n));
    }
  }
  return out;
}

namespace detail {

inline double percentile(const std::vector<double>& sorted, double q) {
  std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

inline std::vector<JobDraft> base_drafts(const ExperimentConfig& cfg) {
  if (cfg.synthetic) return synthetic_jobs(cfg.synth);
  if (cfg.trace_path.empty()) {
    throw std::runtime_error("experiment: either --trace or --synthetic is required");
  }
  auto parsed = parse_trace_file(cfg.trace_path, cfg.columns, cfg.job_limit);
  return parsed.jobs;
}

}  // namespace detail

// One simulation cell: a workload built for (alpha, util, seed) run under one
// algorithm.
inline std::vector<JctRecord> run_cell(const ExperimentConfig& cfg,
                                       const std::vector<JobDraft>& base, Algo algo,
                                       double alpha, double util, std::uint64_t seed) {
  std::vector<JobDraft> drafts = base;
  double mean_mu = 0.5 * (cfg.mu_min + cfg.mu_max);
  if (drafts.size() >= 2) scale_to_utilization(drafts, util, cfg.server_count, mean_mu);

  PlacementConfig pc{cfg.server_count, alpha, cfg.p_min, cfg.p_max, seed * 3 + 1};
  std::vector<Job> jobs = gen_placement(drafts, pc);

  std::vector<JobId> ids;
  ids.reserve(jobs.size());
  for (const auto& j : jobs) ids.push_back(j.id);
  CapacityProfile capacity = gen_capacity(cfg.server_count, ids, {cfg.mu_min, cfg.mu_max, seed * 3 + 2});

  SimConfig sim{cfg.server_count, algo, seed * 3 + 3};
  return run(sim, jobs, capacity);
}

inline Summary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.algorithms.empty()) throw std::runtime_error("experiment: no algorithms selected");
  std::vector<JobDraft> base = detail::base_drafts(cfg);

  Summary summary;
  for (Algo algo : cfg.algorithms) {
    for (double alpha : cfg.alphas) {
      for (double util : cfg.utils) {
        std::vector<double> jcts;
        std::vector<double> overheads;
        for (std::uint64_t seed : cfg.seeds) {
          std::vector<JctRecord> records;
          try {
            records = run_cell(cfg, base, algo, alpha, util, seed);
          } catch (const std::exception& e) {
            throw std::runtime_error(std::string("cell (") + algo_name(algo) + ", alpha=" +
                                     std::to_string(alpha) + ", util=" + std::to_string(util) +
                                     ", seed=" + std::to_string(seed) + "): " + e.what());
          }
          for (const auto& r : records) {
            jcts.push_back(static_cast<double>(r.jct));
            overheads.push_back(r.decision_overhead_us);
            summary.rows.push_back({r.job_id, algo_name(algo), alpha, util, seed, r.arrival,
                                    r.completion, r.jct, r.decision_overhead_us});
          }
        }
        CellSummary cell;
        cell.algorithm = algo_name(algo);
        cell.alpha = alpha;
        cell.util = util;
        cell.job_count = static_cast<long long>(jcts.size());
        double sum = 0.0;
        for (double v : jcts) sum += v;
        cell.avg_jct = sum / static_cast<double>(jcts.size());
        cell.cdf = cdf(jcts);
        std::vector<double> sorted = jcts;
        std::sort(sorted.begin(), sorted.end());
        cell.p50 = detail::percentile(sorted, 0.50);
        cell.p90 = detail::percentile(sorted, 0.90);
        cell.p99 = detail::percentile(sorted, 0.99);
        double osum = 0.0;
        for (double v : overheads) osum += v;
        cell.total_overhead_us = osum;
        cell.mean_overhead_us = osum / static_cast<double>(overheads.size());
        summary.cells.push_back(std::move(cell));
      }
    }
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream csv(cfg.out_dir + "/jobs.csv");
    csv << "job_id,algorithm,alpha,utilization,seed,arrival_slot,completion_slot,"
           "jct_slots,decision_overhead_us\n";
    for (const auto& r : summary.rows) {
      csv << r.job_id << ',' << r.algorithm << ',' << r.alpha << ',' << r.util << ',' << r.seed
          << ',' << r.arrival << ',' << r.completion << ',' << r.jct << ',' << r.overhead_us
          << '\n';
    }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : summary.cells) {
      nlohmann::json cell{{"algorithm", c.algorithm}, {"alpha", c.alpha},
                          {"utilization", c.util},   {"jobs", c.job_count},
                          {"avg_jct", c.avg_jct},    {"p50", c.p50},
                          {"p90", c.p90},            {"p99", c.p99},
                          {"mean_overhead_us", c.mean_overhead_us},
                          {"total_overhead_us", c.total_overhead_us}};
      cell["cdf"] = nlohmann::json::array();
      for (const auto& [v, f] : c.cdf) cell["cdf"].push_back({v, f});
      j.push_back(std::move(cell));
    }
    std::ofstream json_out(cfg.out_dir + "/summary.json");
    json_out << j.dump(2) << '\n';
  }
  return summary;
}

}  // namespace lsched
