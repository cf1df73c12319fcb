#include "mcmopt/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <vector>

namespace mcm::bnb {

using milp::lin_expr;
using milp::relation;
using milp::solution_binding;
using milp::var_kind;

namespace {

i64 div_floor(i128 a, i64 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) q--;
  return static_cast<i64>(q);
}

i64 div_ceil(i128 a, i64 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) q++;
  return static_cast<i64>(q);
}

struct row {
  std::vector<milp::term> terms;
  relation rel = relation::le;
  i64 rhs = 0;
  int guard = -1;       // -1: always active
  int active_when = 1;
};

class engine {
public:
  engine(const milp::model& m, const options& opt) : m_(m), opt_(opt) {
    lo_.reserve(m.vars.size());
    hi_.reserve(m.vars.size());
    for (const milp::var& v : m.vars) {
      lo_.push_back(v.lower);
      hi_.push_back(v.upper);
    }
    var_rows_.assign(m.vars.size(), {});
    for (const milp::constraint& c : m.constraints) {
      row r;
      std::map<milp::var_id, i64> folded;
      for (const milp::term& t : c.lhs.terms) folded[t.v] += t.coef;
      for (const auto& [v, coef] : folded)
        if (coef != 0) r.terms.push_back({coef, v});
      r.rel = c.rel;
      r.rhs = c.rhs - c.lhs.constant;
      if (c.ind) {
        r.guard = c.ind->guard;
        r.active_when = c.ind->active_when;
      }
      int idx = static_cast<int>(rows_.size());
      rows_.push_back(std::move(r));
      for (const milp::term& t : rows_.back().terms)
        var_rows_[static_cast<std::size_t>(t.v)].push_back(idx);
      if (rows_.back().guard >= 0)
        var_rows_[static_cast<std::size_t>(rows_.back().guard)].push_back(idx);
    }
    std::map<milp::var_id, i64> obj_folded;
    for (const milp::term& t : m.objective.terms) obj_folded[t.v] += t.coef;
    for (const auto& [v, coef] : obj_folded)
      if (coef != 0) obj_.push_back({coef, v});
  }

  result run() {
    result res;
    auto t0 = std::chrono::steady_clock::now();
    deadline_ = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(opt_.timeout_seconds));

    if (opt_.warm_start) {
      milp::check_result chk = milp::check_binding(m_, *opt_.warm_start);
      if (!chk.ok)
        throw error("bnb", "warm start rejected: " + chk.first_violation);
      best_vals_.resize(m_.vars.size());
      for (std::size_t i = 0; i < m_.vars.size(); ++i)
        best_vals_[i] = opt_.warm_start->value_of(m_.vars[i].name);
      best_obj_ = eval_obj(best_vals_);
      have_best_ = true;
    }

    bool complete = dfs(-1);

    res.explored_nodes = nodes_;
    std::ostringstream log;
    log << "nodes " << nodes_ << (complete ? " (exhausted)" : " (stopped)");
    if (have_best_) {
      res.binding.st = complete ? solution_binding::status::optimal
                                : solution_binding::status::feasible_timeout;
      res.binding.objective_value = best_obj_;
      for (std::size_t i = 0; i < m_.vars.size(); ++i)
        res.binding.values[m_.vars[i].name] = best_vals_[i];
      log << ", objective " << best_obj_;
    } else if (complete) {
      res.binding.st = solution_binding::status::infeasible;
      log << ", infeasible";
    } else {
      res.binding.st = solution_binding::status::failed;
      res.binding.note = "stopped without an incumbent";
      log << ", no incumbent";
    }
    res.proven = complete;
    res.log = log.str();
    return res;
  }

private:
  const milp::model& m_;
  const options& opt_;
  std::vector<i64> lo_, hi_;
  std::vector<row> rows_;
  std::vector<std::vector<int>> var_rows_;
  std::vector<milp::term> obj_;

  std::vector<i64> best_vals_;
  i64 best_obj_ = 0;
  bool have_best_ = false;

  i64 nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point deadline_;

  struct trail_entry {
    int v;
    i64 old_lo, old_hi;
  };
  std::vector<trail_entry> trail_;

  // propagation work queue of row indices
  std::vector<int> queue_;
  std::vector<char> queued_;

  i64 eval_obj(const std::vector<i64>& vals) const {
    i128 acc = 0;
    for (const milp::term& t : obj_) acc += static_cast<i128>(t.coef) * vals[static_cast<std::size_t>(t.v)];
    return static_cast<i64>(acc);
  }

  void set_lo(int v, i64 nl, bool& changed) {
    if (nl <= lo_[static_cast<std::size_t>(v)]) return;
    trail_.push_back({v, lo_[static_cast<std::size_t>(v)], hi_[static_cast<std::size_t>(v)]});
    lo_[static_cast<std::size_t>(v)] = nl;
    changed = true;
  }

  void set_hi(int v, i64 nh, bool& changed) {
    if (nh >= hi_[static_cast<std::size_t>(v)]) return;
    trail_.push_back({v, lo_[static_cast<std::size_t>(v)], hi_[static_cast<std::size_t>(v)]});
    hi_[static_cast<std::size_t>(v)] = nh;
    changed = true;
  }

  void enqueue_watchers(int v) {
    for (int r : var_rows_[static_cast<std::size_t>(v)]) {
      if (!queued_[static_cast<std::size_t>(r)]) {
        queued_[static_cast<std::size_t>(r)] = 1;
        queue_.push_back(r);
      }
    }
  }

  void min_max_activity(const row& r, i128& mn, i128& mx) const {
    mn = 0;
    mx = 0;
    for (const milp::term& t : r.terms) {
      i64 l = lo_[static_cast<std::size_t>(t.v)], h = hi_[static_cast<std::size_t>(t.v)];
      if (t.coef >= 0) {
        mn += static_cast<i128>(t.coef) * l;
        mx += static_cast<i128>(t.coef) * h;
      } else {
        mn += static_cast<i128>(t.coef) * h;
        mx += static_cast<i128>(t.coef) * l;
      }
    }
  }

  // tighten vars of an active row; returns false on wipeout
  bool tighten(const row& r, bool& changed) {
    i128 mn, mx;
    min_max_activity(r, mn, mx);
    if (r.rel != relation::ge && mn > r.rhs) return false;
    if (r.rel != relation::le && mx < r.rhs) return false;
    for (const milp::term& t : r.terms) {
      std::size_t vi = static_cast<std::size_t>(t.v);
      i64 l = lo_[vi], h = hi_[vi];
      if (t.coef > 0) {
        if (r.rel != relation::ge) {  // sum <= rhs side
          i64 nh = div_floor(r.rhs - (mn - static_cast<i128>(t.coef) * l), t.coef);
          if (nh < h) {
            if (nh < l) return false;
            set_hi(t.v, nh, changed);
            if (changed) enqueue_watchers(t.v);
          }
        }
        if (r.rel != relation::le) {  // sum >= rhs side
          i64 nl = div_ceil(r.rhs - (mx - static_cast<i128>(t.coef) * h), t.coef);
          if (nl > l) {
            if (nl > h) return false;
            set_lo(t.v, nl, changed);
            if (changed) enqueue_watchers(t.v);
          }
        }
      } else if (t.coef < 0) {
        if (r.rel != relation::ge) {
          i64 nl = div_ceil(r.rhs - (mn - static_cast<i128>(t.coef) * h), t.coef);
          if (nl > l) {
            if (nl > h) return false;
            set_lo(t.v, nl, changed);
            if (changed) enqueue_watchers(t.v);
          }
        }
        if (r.rel != relation::le) {
          i64 nh = div_floor(r.rhs - (mx - static_cast<i128>(t.coef) * l), t.coef);
          if (nh < h) {
            if (nh < l) return false;
            set_hi(t.v, nh, changed);
            if (changed) enqueue_watchers(t.v);
          }
        }
      }
      // refresh activities only when bounds moved
      min_max_activity(r, mn, mx);
    }
    return true;
  }

  bool propagate_row(int ri) {
    const row& r = rows_[static_cast<std::size_t>(ri)];
    if (r.guard >= 0) {
      std::size_t g = static_cast<std::size_t>(r.guard);
      if (lo_[g] != hi_[g]) {
        // unfixed guard: if the body cannot hold, force the guard inactive
        i128 mn, mx;
        min_max_activity(r, mn, mx);
        bool impossible = (r.rel == relation::le && mn > r.rhs) ||
                          (r.rel == relation::ge && mx < r.rhs) ||
                          (r.rel == relation::eq && (mn > r.rhs || mx < r.rhs));
        if (impossible) {
          bool changed = false;
          if (r.active_when == 1)
            set_hi(r.guard, 0, changed);
          else
            set_lo(r.guard, 1, changed);
          if (changed) enqueue_watchers(r.guard);
        }
        return true;
      }
      if (lo_[g] != r.active_when) return true;  // fixed inactive
    }
    bool changed = false;
    return tighten(r, changed);
  }

  // objective cutoff as a pseudo-row: obj <= best - 1
  bool propagate_objective() {
    if (!have_best_) return true;
    row r;
    r.terms = obj_;
    r.rel = relation::le;
    r.rhs = best_obj_ - 1;
    bool changed = false;
    return tighten(r, changed);
  }

  // seed_var < 0 re-evaluates every row; otherwise only the watchers of the
  // freshly branched variable (parent state was already at fixpoint)
  bool propagate(int seed_var) {
    queued_.assign(rows_.size(), seed_var < 0 ? 1 : 0);
    queue_.clear();
    if (seed_var < 0) {
      for (int i = 0; i < static_cast<int>(rows_.size()); ++i) queue_.push_back(i);
    } else {
      enqueue_watchers(seed_var);
    }
    if (!propagate_objective()) return false;
    std::size_t head = 0;
    std::size_t since_obj = 0;
    while (head < queue_.size()) {
      int ri = queue_[head++];
      queued_[static_cast<std::size_t>(ri)] = 0;
      if (!propagate_row(ri)) return false;
      if (++since_obj >= 64) {
        since_obj = 0;
        if (!propagate_objective()) return false;
      }
    }
    return propagate_objective();
  }

  int pick_branch_var() const {
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (lo_[i] != hi_[i] && m_.vars[i].kind == var_kind::binary) return static_cast<int>(i);
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (lo_[i] != hi_[i]) return static_cast<int>(i);
    return -1;
  }

  bool leaf_feasible() const {
    for (const row& r : rows_) {
      if (r.guard >= 0 && lo_[static_cast<std::size_t>(r.guard)] != r.active_when) continue;
      i128 acc = 0;
      for (const milp::term& t : r.terms)
        acc += static_cast<i128>(t.coef) * lo_[static_cast<std::size_t>(t.v)];
      bool sat = r.rel == relation::le   ? acc <= r.rhs
                 : r.rel == relation::eq ? acc == r.rhs
                                         : acc >= r.rhs;
      if (!sat) return false;
    }
    return true;
  }

  bool out_of_budget() {
    if (stopped_) return true;
    if ((nodes_ & 0xff) == 0) {
      if (std::chrono::steady_clock::now() > deadline_) stopped_ = true;
      if (opt_.node_limit >= 0 && nodes_ > opt_.node_limit) stopped_ = true;
    }
    return stopped_;
  }

  // returns true when the subtree was fully explored
  bool dfs(int seed_var) {
    nodes_++;
    if (out_of_budget()) return false;
    std::size_t mark = trail_.size();
    bool complete = true;
    if (propagate(seed_var)) {
      int v = pick_branch_var();
      if (v < 0) {
        if (leaf_feasible()) {
          i64 obj = 0;
          for (const milp::term& t : obj_) obj += t.coef * lo_[static_cast<std::size_t>(t.v)];
          if (!have_best_ || obj < best_obj_) {
            best_obj_ = obj;
            best_vals_ = lo_;
            have_best_ = true;
          }
        }
      } else {
        complete = branch(v);
      }
    }
    while (trail_.size() > mark) {
      const trail_entry& e = trail_.back();
      lo_[static_cast<std::size_t>(e.v)] = e.old_lo;
      hi_[static_cast<std::size_t>(e.v)] = e.old_hi;
      trail_.pop_back();
    }
    return complete;
  }

  bool branch(int v) {
    std::size_t vi = static_cast<std::size_t>(v);
    i64 l = lo_[vi], h = hi_[vi];
    bool complete = true;
    if (m_.vars[vi].kind == var_kind::binary) {
      i64 first = 1;  // committing a selector early fixes its one-hot group
      if (opt_.warm_start) {
        auto it = opt_.warm_start->values.find(m_.vars[vi].name);
        if (it != opt_.warm_start->values.end()) first = it->second;
      }
      for (i64 val : {first, 1 - first}) {
        trail_.push_back({v, l, h});
        lo_[vi] = hi_[vi] = val;
        complete = dfs(v) && complete;
        trail_entry e = trail_.back();  // the branch assignment itself
        trail_.pop_back();
        lo_[vi] = e.old_lo;
        hi_[vi] = e.old_hi;
        if (stopped_) return false;
      }
      return complete;
    }
    i64 mid = l + (h - l) / 2;
    for (int side = 0; side < 2; ++side) {
      trail_.push_back({v, l, h});
      if (side == 0)
        hi_[vi] = mid;
      else
        lo_[vi] = mid + 1;
      complete = dfs(v) && complete;
      trail_entry e = trail_.back();
      trail_.pop_back();
      lo_[vi] = e.old_lo;
      hi_[vi] = e.old_hi;
      if (stopped_) return false;
    }
    return complete;
  }
};

}  // namespace

result solve(const milp::model& m, const options& opt) {
  engine e(m, opt);
  return e.run();
}

}  // namespace mcm::bnb
