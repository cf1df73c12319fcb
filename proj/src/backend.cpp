#include "mcmopt/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mcmopt/numeric.hpp"

namespace fs = std::filesystem;

namespace mcm::backend {

using milp::solution_binding;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::string>& builtin_profiles() {
  static const std::map<std::string, std::string> profiles = {
      {"builtin",
       "binary = mcmsolve\n"
       "command = {bin} {lp} --timeout {timeout} --out {sol}\n"
       "command_with_start = {bin} {lp} --timeout {timeout} --mip-start {mst} --out {sol}\n"
       "parser = plain\n"},
      {"cbc",
       "binary = cbc\n"
       "command = {bin} {lp} sec {timeout} solve solu {sol}\n"
       "command_with_start = {bin} {lp} sec {timeout} mips {mst} solve solu {sol}\n"
       "parser = cbc\n"},
      {"glpsol",
       "binary = glpsol\n"
       "command = {bin} --lp {lp} --tmlim {timeout} -o {sol}\n"
       "command_with_start = \n"
       "parser = glpk\n"}};
  return profiles;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string exe_dir() {
  std::error_code ec;
  fs::path p = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return "";
  return p.parent_path().string();
}

i64 round_checked(double v, const std::string& name) {
  double r = std::nearbyint(v);
  if (std::abs(v - r) > 1e-4)
    throw error("solution parse", "non-integral value " + std::to_string(v) + " for " + name);
  return static_cast<i64>(r);
}

}  // namespace

solver_profile parse_profile(const std::string& text, const std::string& name) {
  solver_profile p;
  p.name = name;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw error("profile", name + " line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key == "binary")
      p.binary = value;
    else if (key == "command")
      p.command = value;
    else if (key == "command_with_start")
      p.command_with_start = value;
    else if (key == "parser")
      p.parser = value;
    else
      throw error("profile", name + " line " + std::to_string(lineno) + ": unknown key " + key);
  }
  if (p.command.empty() || p.parser.empty())
    throw error("profile", name + ": command and parser are required");
  return p;
}

std::vector<std::string> builtin_profile_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtin_profiles()) names.push_back(k);
  return names;
}

solver_profile load_profile(const std::string& name, const std::string& profile_dir) {
  std::vector<std::string> dirs;
  if (!profile_dir.empty()) dirs.push_back(profile_dir);
  if (const char* env = std::getenv("MCMOPT_PROFILE_DIR")) dirs.push_back(env);
  std::string exed = exe_dir();
  if (!exed.empty()) {
    dirs.push_back(exed + "/profiles");
    dirs.push_back(exed + "/../profiles");
  }
  for (const std::string& d : dirs) {
    fs::path candidate = fs::path(d) / (name + ".profile");
    std::ifstream in(candidate);
    if (in) {
      std::stringstream buf;
      buf << in.rdbuf();
      return parse_profile(buf.str(), name);
    }
  }
  auto it = builtin_profiles().find(name);
  if (it != builtin_profiles().end()) return parse_profile(it->second, name);
  throw error("backend", "no solver profile named '" + name + "'");
}

milp::solution_binding parse_solution_plain(const std::string& text) {
  solution_binding b;
  b.st = solution_binding::status::failed;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_status = false;
  while (std::getline(is, line)) {
    lineno++;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::istringstream ls(t.substr(1));
      std::string key;
      ls >> key;
      if (key == "status") {
        std::string st;
        ls >> st;
        if (st == "optimal")
          b.st = solution_binding::status::optimal;
        else if (st == "feasible" || st == "feasible(timeout)")
          b.st = solution_binding::status::feasible_timeout;
        else if (st == "infeasible")
          b.st = solution_binding::status::infeasible;
        else
          b.st = solution_binding::status::failed;
        have_status = true;
      } else if (key == "objective") {
        ls >> b.objective_value;
      }
      continue;
    }
    std::istringstream ls(t);
    std::string name;
    double value;
    if (!(ls >> name >> value))
      throw error("solution parse", "line " + std::to_string(lineno) + ": expected 'name value'");
    b.values[name] = round_checked(value, name);
  }
  if (!have_status) throw error("solution parse", "missing '# status' line");
  return b;
}

milp::solution_binding parse_solution_cbc(const std::string& text) {
  solution_binding b;
  b.st = solution_binding::status::failed;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (first) {
      first = false;
      if (t.rfind("Optimal", 0) == 0)
        b.st = solution_binding::status::optimal;
      else if (t.rfind("Infeasible", 0) == 0)
        b.st = solution_binding::status::infeasible;
      else if (t.rfind("Stopped", 0) == 0)
        b.st = solution_binding::status::feasible_timeout;
      else
        throw error("solution parse", "cbc line 1: unrecognized status '" + t + "'");
      std::size_t pos = t.find("objective value");
      if (pos != std::string::npos) {
        std::istringstream vs(t.substr(pos + 15));
        double obj;
        if (vs >> obj) b.objective_value = round_checked(obj, "objective");
      }
      continue;
    }
    // rows: index name value [reduced cost]
    std::istringstream ls(t);
    std::string idx, name;
    double value;
    if (!(ls >> idx)) continue;
    if (idx == "**") {  // cbc marks superbasic rows
      if (!(ls >> idx)) continue;
    }
    if (!(ls >> name >> value))
      throw error("solution parse", "cbc line " + std::to_string(lineno) + ": malformed row");
    b.values[name] = round_checked(value, name);
  }
  if (first) throw error("solution parse", "empty cbc solution file");
  return b;
}

milp::solution_binding parse_solution_glpk(const std::string& text) {
  solution_binding b;
  b.st = solution_binding::status::failed;
  std::istringstream is(text);
  std::string line;
  bool in_columns = false;
  bool have_status = false;
  std::string pending_name;
  while (std::getline(is, line)) {
    std::string t = trim(line);
    if (t.rfind("Status:", 0) == 0) {
      have_status = true;
      if (t.find("OPTIMAL") != std::string::npos)
        b.st = solution_binding::status::optimal;
      else if (t.find("FEASIBLE") != std::string::npos)
        b.st = solution_binding::status::feasible_timeout;
      else if (t.find("EMPTY") != std::string::npos || t.find("UNDEFINED") != std::string::npos ||
               t.find("INFEASIBLE") != std::string::npos)
        b.st = solution_binding::status::infeasible;
      continue;
    }
    if (t.rfind("Objective:", 0) == 0) {
      std::size_t eq = t.find('=');
      if (eq != std::string::npos) {
        std::istringstream vs(t.substr(eq + 1));
        double obj;
        if (vs >> obj) b.objective_value = round_checked(obj, "objective");
      }
      continue;
    }
    if (t.rfind("No.", 0) == 0 && t.find("Column name") != std::string::npos) {
      in_columns = true;
      continue;
    }
    if (in_columns) {
      if (t.rfind("No.", 0) == 0 || t.find("Karush-Kuhn") != std::string::npos) {
        in_columns = false;
        continue;
      }
      if (t.empty() || t[0] == '-') continue;
      std::istringstream ls(t);
      std::string first_tok;
      if (!(ls >> first_tok)) continue;
      if (!pending_name.empty()) {
        // long names wrap: the previous line only carried "No. name"
        std::string marker = first_tok;
        double value;
        std::istringstream rest(t);
        if (marker == "*") {
          if (!(rest >> marker >> value)) continue;
        } else {
          std::istringstream vs(first_tok);
          if (!(vs >> value)) continue;
        }
        b.values[pending_name] = round_checked(value, pending_name);
        pending_name.clear();
        continue;
      }
      if (!std::isdigit(static_cast<unsigned char>(first_tok[0]))) continue;
      std::string name;
      if (!(ls >> name)) continue;
      std::string marker;
      double value;
      if (!(ls >> marker)) {
        pending_name = name;  // wrapped row
        continue;
      }
      if (marker == "*") {
        if (!(ls >> value)) {
          pending_name = name;
          continue;
        }
      } else {
        std::istringstream vs(marker);
        if (!(vs >> value)) continue;
      }
      b.values[name] = round_checked(value, name);
    }
  }
  if (!have_status) throw error("solution parse", "missing glpk 'Status:' line");
  return b;
}

milp::solution_binding parse_solution(const std::string& parser_id, const std::string& text) {
  if (parser_id == "plain") return parse_solution_plain(text);
  if (parser_id == "cbc") return parse_solution_cbc(text);
  if (parser_id == "glpk") return parse_solution_glpk(text);
  throw error("backend", "unknown solution parser '" + parser_id + "'");
}

milp::solution_binding solve_external(const solver_job& job) {
  if (job.timeout_seconds <= 0) throw error("backend", "timeout must be positive");
  fs::path dir(job.work_dir.empty() ? "." : job.work_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw error("backend", "cannot create working directory " + dir.string());

  fs::path lp = dir / "model.lp";
  fs::path mst = dir / "start.mst";
  fs::path sol = dir / "solution.sol";
  fs::path log = dir / "log.txt";
  {
    std::ofstream out(lp);
    out << job.lp_text;
    if (!out) throw error("backend", "cannot write " + lp.string());
  }
  bool with_start = job.mip_start_text.has_value() && !job.profile.command_with_start.empty();
  if (job.mip_start_text) {
    std::ofstream out(mst);
    out << *job.mip_start_text;
  }
  fs::remove(sol, ec);

  std::string binary = job.profile.binary;
  if (const char* env = std::getenv("MCMOPT_SOLVER_BIN")) binary = env;
  if (binary.find('/') == std::string::npos) {
    // prefer a sibling of the running executable over PATH lookup
    std::string exed = exe_dir();
    if (!exed.empty()) {
      for (const fs::path cand : {fs::path(exed) / binary, fs::path(exed) / ".." / binary}) {
        if (fs::exists(cand)) {
          binary = cand.string();
          break;
        }
      }
    }
  }

  std::string cmd = with_start ? job.profile.command_with_start : job.profile.command;
  cmd = replace_all(cmd, "{bin}", binary);
  cmd = replace_all(cmd, "{lp}", lp.string());
  cmd = replace_all(cmd, "{mst}", mst.string());
  cmd = replace_all(cmd, "{sol}", sol.string());
  cmd = replace_all(cmd, "{timeout}", std::to_string(static_cast<i64>(job.timeout_seconds)));
  i64 hard_limit = static_cast<i64>(job.timeout_seconds) + 30;
  std::string shell = "timeout " + std::to_string(hard_limit) + " " + cmd + " > " +
                      log.string() + " 2>&1";
  int rc = std::system(shell.c_str());
  int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  if (exit_code == 127)
    throw error("backend", "solver not found: " + binary + " (profile " + job.profile.name + ")");

  std::ifstream in(sol);
  if (!in) {
    if (exit_code == 2) {
      solution_binding b;
      b.st = solution_binding::status::infeasible;
      return b;
    }
    throw error("backend", "solver produced no solution file (exit " +
                               std::to_string(exit_code) + "), see " + log.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_solution(job.profile.parser, buf.str());
}

namespace {

struct construction {
  i64 left, right;
  int left_shift;
  sign_bit sign_left, sign_right;
  int neg_shift;
};

// all odd fundamentals one addition away from (u, v); left operand shifted
void successors(i64 u, i64 v, int s_max, i64 cmax, bool allow_neg,
                std::map<i64, construction>& out) {
  auto offer = [&](i64 val, construction c) {
    if (val >= 1 && val <= cmax && val % 2 == 1 && !out.count(val)) out[val] = c;
  };
  for (int s = 1; s <= s_max; ++s) {
    i64 sh = u << s;
    if (sh > 2 * cmax) break;  // the pre-shift sum domain caps shifted operands
    offer(sh + v, {u, v, s, sign_bit::plus, sign_bit::plus, 0});
    offer(sh - v, {u, v, s, sign_bit::plus, sign_bit::minus, 0});
    offer(v - sh, {u, v, s, sign_bit::minus, sign_bit::plus, 0});
  }
  if (allow_neg) {
    const std::pair<i64, construction> combos[3] = {
        {u + v, {u, v, 0, sign_bit::plus, sign_bit::plus, 0}},
        {u - v, {u, v, 0, sign_bit::plus, sign_bit::minus, 0}},
        {v - u, {u, v, 0, sign_bit::minus, sign_bit::plus, 0}}};
    for (const auto& [sum, base] : combos) {
      if (sum <= 0) continue;
      construction c = base;
      c.neg_shift = trailing_zeros(sum);
      offer(sum >> c.neg_shift, c);
    }
  }
}

struct oracle_search {
  std::vector<i64> targets;
  int s_max;
  i64 cmax;
  bool allow_neg;
  i64 guard;
  i64 explored = 0;
  std::set<std::vector<i64>> visited;
  std::vector<std::pair<i64, construction>> chain;  // insertion order

  bool dfs(std::vector<i64>& have, int remaining) {
    explored++;
    if (explored > guard) throw error("bfs_oracle", "state-space guard exceeded");
    int missing = 0;
    for (i64 t : targets)
      if (!std::binary_search(have.begin(), have.end(), t)) missing++;
    if (missing == 0) return true;
    if (missing > remaining) return false;
    if (!visited.insert(have).second) return false;

    std::map<i64, construction> cands;
    for (i64 u : have)
      for (i64 v : have) successors(u, v, s_max, cmax, allow_neg, cands);
    for (const auto& [val, c] : cands) {
      if (std::binary_search(have.begin(), have.end(), val)) continue;
      std::vector<i64> next = have;
      next.insert(std::upper_bound(next.begin(), next.end(), val), val);
      chain.push_back({val, c});
      if (dfs(next, remaining - 1)) return true;
      chain.pop_back();
    }
    return false;
  }
};

}  // namespace

oracle_result bfs_oracle(const std::vector<i64>& targets, int max_adders, int wordlength,
                         bool allow_negative_shifts, i64 state_guard) {
  if (wordlength < 1 || wordlength > 20) throw error("bfs_oracle", "wordlength out of range");
  std::set<i64> odd_set;
  std::vector<odd_normalized> mapped;
  for (i64 t : targets) {
    if (t == 0) continue;
    odd_normalized n = normalize_constant(t);
    mapped.push_back(n);
    if (n.odd != 1) odd_set.insert(n.odd);
  }
  i64 cmax = pow2(wordlength);
  for (i64 t : odd_set)
    if (t > cmax)
      throw error("bfs_oracle", "target " + std::to_string(t) + " exceeds the wordlength bound");

  oracle_result res;
  res.witness = adder_graph::with_input(1);

  for (int k = static_cast<int>(odd_set.size()); k <= max_adders; ++k) {
    oracle_search s;
    s.targets.assign(odd_set.begin(), odd_set.end());
    s.s_max = wordlength;
    s.cmax = cmax;
    s.allow_neg = allow_negative_shifts;
    s.guard = state_guard;
    std::vector<i64> have{1};
    if (s.dfs(have, k)) {
      res.optimum_adders = static_cast<i64>(s.chain.size());
      res.explored_states += s.explored;
      std::map<i64, int> node_of{{1, 0}};
      for (const auto& [val, c] : s.chain) {
        adder_node n;
        n.index = static_cast<int>(res.witness.adders.size()) + 1;
        n.left = node_of.at(c.left);
        n.right = node_of.at(c.right);
        n.left_shift = c.left_shift;
        n.neg_shift = c.neg_shift;
        n.sign_left = c.sign_left;
        n.sign_right = c.sign_right;
        n.fundamental = val;
        res.witness.adders.push_back(n);
        node_of[val] = n.index;
      }
      for (const odd_normalized& t : mapped)
        res.witness.outputs.push_back({t.original, node_of.at(t.odd), t.shift, t.negated});
      validation_report rep = validate(res.witness);
      if (!rep.ok) throw error("bfs_oracle", "internal: witness fails validation");
      return res;
    }
    res.explored_states += s.explored;
  }
  throw error("bfs_oracle",
              "no adder graph within " + std::to_string(max_adders) + " adders");
}

}  // namespace mcm::backend
