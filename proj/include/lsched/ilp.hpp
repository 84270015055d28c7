#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "lsched/estimation.hpp"
#include "lsched/model.hpp"

namespace lsched {

namespace detail {

// Dinic max-flow on small graphs.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(static_cast<std::size_t>(nodes), -1) {}

  void add_edge(int u, int v, long long cap) {
    edges_.push_back({v, head_[static_cast<std::size_t>(u)], cap});
    head_[static_cast<std::size_t>(u)] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[static_cast<std::size_t>(v)], 0});
    head_[static_cast<std::size_t>(v)] = static_cast<int>(edges_.size()) - 1;
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      iter_ = head_;
      long long f;
      while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += f;
    }
    return flow;
  }

  long long edge_flow(int edge_id) const {
    // Flow on the i-th call to add_edge lives in the reverse edge's capacity.
    return edges_[static_cast<std::size_t>(2 * edge_id + 1)].cap;
  }

 private:
  struct Edge {
    int to;
    int next;
    long long cap;
  };

  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    level_[static_cast<std::size_t>(s)] = 0;
    std::vector<int> q{s};
    for (std::size_t qi = 0; qi < q.size(); ++qi) {
      int u = q[qi];
      for (int e = head_[static_cast<std::size_t>(u)]; e != -1; e = edges_[static_cast<std::size_t>(e)].next) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.cap > 0 && level_[static_cast<std::size_t>(ed.to)] < 0) {
          level_[static_cast<std::size_t>(ed.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push_back(ed.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  long long dfs(int u, int t, long long pushed) {
    if (u == t) return pushed;
    for (int& e = iter_[static_cast<std::size_t>(u)]; e != -1;
         e = edges_[static_cast<std::size_t>(e)].next) {
      Edge& ed = edges_[static_cast<std::size_t>(e)];
      if (ed.cap > 0 && level_[static_cast<std::size_t>(ed.to)] ==
                            level_[static_cast<std::size_t>(u)] + 1) {
        long long f = dfs(ed.to, t, std::min(pushed, ed.cap));
        if (f > 0) {
          ed.cap -= f;
          edges_[static_cast<std::size_t>(e ^ 1)].cap += f;
          return f;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> iter_;
  std::vector<int> level_;
};

}  // namespace detail

struct SubServer {
  ServerId id = 0;
  SlotTime busy = 0;
  int mu = 1;
  bool active = false;  // receives slots only when busy <= range lo
};

struct SubGroup {
  int group_index = 0;
  long long demand = 0;
  std::vector<int> servers;  // indices into LinearSubproblem::servers, id-ascending
};

// Program P restricted to one subrange where the capacity terms are linear.
struct LinearSubproblem {
  std::vector<SubGroup> groups;
  std::vector<SubServer> servers;
  SlotTime lo = 0;
  SlotTime hi = 0;  // half-open [lo, hi)
};

// Witness slots, aligned with each group's eligible-server list.
using SlotWitness = std::vector<std::vector<SlotTime>>;

struct SubSolution {
  SlotTime phi = 0;
  SlotWitness slots;
};

inline LinearSubproblem make_subproblem(const Job& job, const BusyVector& busy,
                                        const CapacityProfile& capacity,
                                        SlotInterval range) {
  LinearSubproblem p;
  p.lo = range.lo;
  p.hi = range.hi;
  std::set<ServerId> all;
  for (const auto& g : job.groups) all.insert(g.available_servers.begin(),
                                              g.available_servers.end());
  std::vector<int> pos(all.empty() ? 0 : static_cast<std::size_t>(*all.rbegin()) + 1, -1);
  for (ServerId m : all) {
    SubServer s;
    s.id = m;
    s.busy = busy[static_cast<std::size_t>(m - 1)];
    s.mu = capacity.mu(m, job.id);
    s.active = s.busy <= range.lo;
    pos[static_cast<std::size_t>(m)] = static_cast<int>(p.servers.size());
    p.servers.push_back(s);
  }
  for (const auto& g : job.groups) {
    SubGroup sg;
    sg.group_index = g.group_index;
    sg.demand = g.task_count;
    for (ServerId m : g.available_servers) {
      int idx = pos[static_cast<std::size_t>(m)];
      if (p.servers[static_cast<std::size_t>(idx)].active) sg.servers.push_back(idx);
    }
    p.groups.push_back(std::move(sg));
  }
  return p;
}

namespace detail {

// Exact search over per-(group, rate-class) slot totals. Servers with the
// same rate are interchangeable for counting purposes: once every group has
// fixed how many slots it draws from each rate class, realizability reduces
// to one bipartite transportation problem per class, settled by an integral
// max-flow. The search walks (group, class) pairs -- fastest class first,
// largest count first -- and prunes with a relaxation that keeps committed
// class totals exact while everything still open flows fractionally. A full
// assignment that passes the relaxation is therefore always realizable.
struct ClassSearch {
  const LinearSubproblem* p = nullptr;
  std::vector<long long> cap;                  // per server, slots
  std::vector<int> cls;                        // server -> class index
  std::vector<int> class_mu;                   // class -> rate, descending
  std::vector<std::vector<long long>> taken;   // committed slots, [group][class]
  std::vector<std::vector<long long>> reach;   // slot caps, [group][class]
  std::vector<long long> rem_d;                // outstanding tasks per group

  void init(const LinearSubproblem& sub, std::vector<long long> caps) {
    p = &sub;
    cap = std::move(caps);
    class_mu.clear();
    for (const auto& s : sub.servers) class_mu.push_back(s.mu);
    std::sort(class_mu.begin(), class_mu.end(), std::greater<>());
    class_mu.erase(std::unique(class_mu.begin(), class_mu.end()), class_mu.end());
    cls.resize(sub.servers.size());
    for (std::size_t s = 0; s < sub.servers.size(); ++s) {
      cls[s] = static_cast<int>(std::find(class_mu.begin(), class_mu.end(),
                                          sub.servers[s].mu) -
                                class_mu.begin());
    }
    std::size_t n_cls = class_mu.size();
    taken.assign(sub.groups.size(), std::vector<long long>(n_cls, 0));
    reach.assign(sub.groups.size(), std::vector<long long>(n_cls, 0));
    rem_d.clear();
    for (std::size_t g = 0; g < sub.groups.size(); ++g) {
      rem_d.push_back(sub.groups[g].demand);
      for (int sidx : sub.groups[g].servers) {
        reach[g][static_cast<std::size_t>(cls[static_cast<std::size_t>(sidx)])] +=
            cap[static_cast<std::size_t>(sidx)];
      }
    }
  }

  // Flow relaxation in task units. Committed (group, class) totals must be
  // placed exactly on that class's eligible servers; outstanding demand may
  // spread fractionally over any eligible server (restricted, for the group
  // currently being branched, to the classes not yet decided).
  bool relax_ok(std::size_t gk, std::size_t ck) const {
    std::size_t n_groups = p->groups.size();
    std::size_t n_cls = class_mu.size();
    std::size_t n_servers = p->servers.size();
    int base_pair = 0;
    int base_out = static_cast<int>(n_groups * n_cls);
    int base_srv = base_out + static_cast<int>(n_groups);
    int source = base_srv + static_cast<int>(n_servers);
    int sink = source + 1;
    MaxFlow mf(sink + 1);
    long long total = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      for (std::size_t c = 0; c < n_cls; ++c) {
        bool committed = g < gk || (g == gk && c < ck);
        if (!committed || taken[g][c] == 0) continue;
        long long tasks = taken[g][c] * class_mu[c];
        total += tasks;
        int node = base_pair + static_cast<int>(g * n_cls + c);
        mf.add_edge(source, node, tasks);
        for (int sidx : p->groups[g].servers) {
          if (cls[static_cast<std::size_t>(sidx)] == static_cast<int>(c)) {
            mf.add_edge(node, base_srv + sidx, tasks);
          }
        }
      }
      if (g < gk || rem_d[g] <= 0) continue;
      total += rem_d[g];
      int node = base_out + static_cast<int>(g);
      mf.add_edge(source, node, rem_d[g]);
      for (int sidx : p->groups[g].servers) {
        if (g == gk && cls[static_cast<std::size_t>(sidx)] < static_cast<int>(ck)) continue;
        mf.add_edge(node, base_srv + sidx, rem_d[g]);
      }
    }
    for (std::size_t s = 0; s < n_servers; ++s) {
      if (cap[s] > 0) {
        mf.add_edge(base_srv + static_cast<int>(s), sink, cap[s] * p->servers[s].mu);
      }
    }
    return mf.run(source, sink) == total;
  }

  bool dfs(std::size_t g, std::size_t c) {
    if (g == p->groups.size()) return true;
    if (!relax_ok(g, c)) return false;
    if (rem_d[g] <= 0 || c == class_mu.size()) {
      if (rem_d[g] > 0) return false;
      return dfs(g + 1, 0);
    }
    long long mu = class_mu[c];
    long long rest = 0;
    for (std::size_t c2 = c + 1; c2 < class_mu.size(); ++c2) {
      rest += reach[g][c2] * class_mu[c2];
    }
    long long y_min = std::max<long long>(0, ceil_div(rem_d[g] - rest, mu));
    long long y_max = std::min(reach[g][c], ceil_div(rem_d[g], mu));
    for (long long y = y_max; y >= y_min; --y) {
      taken[g][c] = y;
      rem_d[g] -= y * mu;
      if (dfs(g, c + 1)) return true;
      rem_d[g] += y * mu;
      taken[g][c] = 0;
    }
    return false;
  }

  // Split every class's committed totals across its servers by an integral
  // transportation flow; the relaxation already certified this must succeed.
  SlotWitness witness() const {
    std::size_t n_groups = p->groups.size();
    SlotWitness slots(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      slots[g].assign(p->groups[g].servers.size(), 0);
    }
    for (std::size_t c = 0; c < class_mu.size(); ++c) {
      MaxFlow mf(static_cast<int>(n_groups + p->servers.size()) + 2);
      int source = static_cast<int>(n_groups + p->servers.size());
      int sink = source + 1;
      long long need = 0;
      std::vector<std::vector<std::pair<std::size_t, int>>> edge_ids(n_groups);
      int next_edge = 0;
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (taken[g][c] == 0) continue;
        need += taken[g][c];
        mf.add_edge(source, static_cast<int>(g), taken[g][c]);
        ++next_edge;
        for (std::size_t e = 0; e < p->groups[g].servers.size(); ++e) {
          int sidx = p->groups[g].servers[e];
          if (cls[static_cast<std::size_t>(sidx)] != static_cast<int>(c)) continue;
          edge_ids[g].push_back({e, next_edge});
          mf.add_edge(static_cast<int>(g), static_cast<int>(n_groups) + sidx, taken[g][c]);
          ++next_edge;
        }
      }
      for (std::size_t s = 0; s < p->servers.size(); ++s) {
        if (cls[s] != static_cast<int>(c) || cap[s] <= 0) continue;
        mf.add_edge(static_cast<int>(n_groups + s), sink, cap[s]);
        ++next_edge;
      }
      if (mf.run(source, sink) != need) {
        throw std::logic_error("class witness: certified totals failed to place");
      }
      for (std::size_t g = 0; g < n_groups; ++g) {
        for (const auto& [e, id] : edge_ids[g]) slots[g][e] = mf.edge_flow(id);
      }
    }
    return slots;
  }
};

// Fast path when the per-slot rate is uniform: demands convert to whole
// slots and feasibility reduces to integral transportation.
inline std::optional<SlotWitness> uniform_feasible(const LinearSubproblem& p,
                                                   const std::vector<long long>& cap, int mu) {
  int n_groups = static_cast<int>(p.groups.size());
  int n_servers = static_cast<int>(p.servers.size());
  MaxFlow mf(n_groups + n_servers + 2);
  int source = n_groups + n_servers;
  int sink = source + 1;
  long long need = 0;
  std::vector<std::vector<int>> edge_ids(static_cast<std::size_t>(n_groups));
  int next_edge = 0;
  for (int g = 0; g < n_groups; ++g) {
    long long d = ceil_div(p.groups[static_cast<std::size_t>(g)].demand, mu);
    need += d;
    mf.add_edge(source, g, d);
    ++next_edge;
    for (int sidx : p.groups[static_cast<std::size_t>(g)].servers) {
      edge_ids[static_cast<std::size_t>(g)].push_back(next_edge);
      mf.add_edge(g, n_groups + sidx, d);
      ++next_edge;
    }
  }
  for (int s = 0; s < n_servers; ++s) {
    mf.add_edge(n_groups + s, sink, cap[static_cast<std::size_t>(s)]);
    ++next_edge;
  }
  if (mf.run(source, sink) != need) return std::nullopt;
  SlotWitness slots(static_cast<std::size_t>(n_groups));
  for (int g = 0; g < n_groups; ++g) {
    const auto& ids = edge_ids[static_cast<std::size_t>(g)];
    slots[static_cast<std::size_t>(g)].resize(ids.size());
    for (std::size_t e = 0; e < ids.size(); ++e) {
      slots[static_cast<std::size_t>(g)][e] = mf.edge_flow(ids[e]);
    }
  }
  return slots;
}

}  // namespace detail

// Exact feasibility of the constraint system at a fixed phi, with a witness.
// The witness is deterministic: the search commits class totals greedily
// (fastest rates first, largest counts first) and the transportation split
// below them is itself deterministic, so reruns reproduce the same slots.
inline std::optional<SlotWitness> feasible_at(const LinearSubproblem& p, SlotTime phi) {
  std::vector<long long> cap(p.servers.size(), 0);
  for (std::size_t s = 0; s < p.servers.size(); ++s) {
    if (p.servers[s].active) cap[s] = std::max<SlotTime>(0, phi - p.servers[s].busy);
  }
  // Per-group necessary condition.
  for (const auto& g : p.groups) {
    long long reach = 0;
    for (int sidx : g.servers) reach += cap[static_cast<std::size_t>(sidx)] *
                                        p.servers[static_cast<std::size_t>(sidx)].mu;
    if (reach < g.demand) return std::nullopt;
  }

  bool uniform = true;
  int mu0 = -1;
  for (const auto& g : p.groups) {
    for (int sidx : g.servers) {
      int mu = p.servers[static_cast<std::size_t>(sidx)].mu;
      if (mu0 < 0) mu0 = mu;
      if (mu != mu0) uniform = false;
    }
  }
  if (uniform && mu0 > 0) return detail::uniform_feasible(p, cap, mu0);

  detail::ClassSearch ctx;
  ctx.init(p, std::move(cap));
  if (!ctx.dfs(0, 0)) return std::nullopt;
  return ctx.witness();
}

// Minimal phi in [lo, hi) admitting a feasible slot allocation, or nothing.
// Feasibility is monotone in phi, so a binary search suffices.
inline std::optional<SubSolution> solve_subrange(const LinearSubproblem& p) {
  if (p.lo >= p.hi) return std::nullopt;
  // One probe at the top decides the whole interval; infeasible intervals are
  // dismissed without ever probing the tight low edge, which is the costliest
  // point to refute.
  if (!feasible_at(p, p.hi - 1)) return std::nullopt;
  SlotTime lo = p.lo;
  SlotTime hi = p.hi - 1;
  while (lo < hi) {
    SlotTime mid = lo + (hi - lo) / 2;
    if (feasible_at(p, mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  SubSolution sol;
  sol.phi = lo;
  sol.slots = *feasible_at(p, lo);
  return sol;
}

// Exhaustive makespan oracle over all per-group task splits. Guarded against
// combinatorial explosion; intended for tests.
inline std::pair<SlotTime, Assignment> brute_force_opt(const Job& job,
                                                       const ClusterSnapshot& snapshot) {
  std::set<ServerId> all;
  for (const auto& g : job.groups) all.insert(g.available_servers.begin(),
                                              g.available_servers.end());
  if (all.size() > 4 || job.total_tasks() > 12) {
    throw std::invalid_argument("brute_force_opt: instance too large");
  }

  BusyVector busy = busy_vector(snapshot);
  std::size_t n_groups = job.groups.size();
  std::vector<std::vector<long long>> counts(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    counts[g].assign(job.groups[g].available_servers.size(), 0);
  }
  std::vector<std::vector<long long>> best_counts;
  SlotTime best_phi = std::numeric_limits<SlotTime>::max();

  // extra[m-1] accumulates this job's per-group slot ceilings on server m.
  std::vector<SlotTime> extra(static_cast<std::size_t>(snapshot.server_count), 0);

  auto makespan = [&]() {
    SlotTime phi = 0;
    for (ServerId m : all) {
      std::size_t i = static_cast<std::size_t>(m - 1);
      if (extra[i] > 0) phi = std::max(phi, busy[i] + extra[i]);
    }
    return phi;
  };

  std::function<void(std::size_t, std::size_t, long long)> rec =
      [&](std::size_t g, std::size_t s, long long remaining) {
        if (g == n_groups) {
          SlotTime phi = makespan();
          if (phi < best_phi) {
            best_phi = phi;
            best_counts = counts;
          }
          return;
        }
        const TaskGroup& group = job.groups[g];
        if (s + 1 == group.available_servers.size()) {
          ServerId m = group.available_servers[s];
          std::size_t i = static_cast<std::size_t>(m - 1);
          counts[g][s] = remaining;
          SlotTime d = ceil_div(remaining, snapshot.capacity.mu(m, job.id));
          extra[i] += d;
          if (makespan() < best_phi) {
            long long next_rem = (g + 1 < n_groups) ? job.groups[g + 1].task_count : 0;
            rec(g + 1, 0, next_rem);
          }
          extra[i] -= d;
          counts[g][s] = 0;
          return;
        }
        ServerId m = group.available_servers[s];
        std::size_t i = static_cast<std::size_t>(m - 1);
        for (long long t = 0; t <= remaining; ++t) {
          counts[g][s] = t;
          SlotTime d = ceil_div(t, snapshot.capacity.mu(m, job.id));
          extra[i] += d;
          if (makespan() < best_phi) rec(g, s + 1, remaining - t);
          extra[i] -= d;
          counts[g][s] = 0;
        }
      };
  rec(0, 0, job.groups.empty() ? 0 : job.groups[0].task_count);

  Assignment a;
  a.phi = best_phi;
  for (std::size_t g = 0; g < n_groups; ++g) {
    GroupAlloc ga;
    ga.group_index = job.groups[g].group_index;
    for (std::size_t s = 0; s < best_counts[g].size(); ++s) {
      long long t = best_counts[g][s];
      if (t == 0) continue;
      ServerId m = job.groups[g].available_servers[s];
      ga.allocs.push_back({m, ceil_div(t, snapshot.capacity.mu(m, job.id)), t});
    }
    a.groups.push_back(std::move(ga));
  }
  return {best_phi, a};
}

}  // namespace lsched
