#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcmopt/graph.hpp"
#include "mcmopt/milp.hpp"
#include "mcmopt/numeric.hpp"

namespace mcm::models {

enum class metric { adders, adders_ad, bits, truncated };

std::string to_string(metric m);
std::optional<metric> metric_from_string(const std::string& s);

struct instance {
  std::vector<i64> targets;  // original signed constants, zeros dropped on normalize
  metric objective = metric::adders;
  std::optional<i64> adder_bound;        // override for N_A bar
  std::optional<int> wordlength;         // w, default ceil(log2(max odd target))
  std::optional<int> max_shift;          // S_max, default w
  std::optional<int> min_shift;          // S_min, default -(w + 1)
  std::optional<int> input_wordlength;   // w_in, required for bits/truncated
  std::vector<i64> error_budgets;        // per original target, required for truncated
  std::optional<int> ad_bound;
  double timeout_seconds = 1800;
  bool symmetry_breaking = true;         // u_a >= u_{a+1}
  bool adder_bound_slack = false;        // +1 adder on top of the derived bound
  milp::linearize lin_mode = milp::linearize::big_m;
};

struct normalized_instance {
  instance raw;
  std::vector<odd_normalized> target_map;  // per kept original target
  std::vector<i64> odd_targets;            // distinct odd fundamentals, first-appearance order
  std::vector<i64> node_budgets;           // per odd target, in the node's LSB units
  i64 adder_bound = 0;
  int w = 1;
  int s_max = 1;
  int s_min = -2;
  int w_in = 0;
  i64 xbar = 1;
};

normalized_instance normalize(const instance& inst);

struct model_bundle {
  milp::model model;
  metric flavor = metric::adders;
  normalized_instance inst;
  std::map<std::string, std::string> decode_map;  // var name -> semantic role
  int msb_max = 0;
  int t_max = 0;
  i64 eps_max = 0;
};

model_bundle build_mcm_adders(const instance& inst);
model_bundle build_mcm_ad(const instance& inst);
model_bundle build_mcm_bits(const instance& inst);
model_bundle build_tmcm(const instance& inst);

// reconstructs the adder graph from a solved binding and re-verifies every
// metric the model claims; any disagreement is a hard error
adder_graph decode(const model_bundle& bundle, const milp::solution_binding& binding);

// completes a structural assignment (u, selections, shifts, signs, outputs,
// truncations) into a full feasible binding for the bundle's model
milp::solution_binding complete_binding(const model_bundle& bundle,
                                        const std::map<std::string, i64>& fixed);

// per-constant CSD expansion graph: the feasibility seed used as a MIP start
adder_graph csd_expansion_graph(const normalized_instance& ni);

// binding for an arbitrary valid graph with at most the bundle's adder slots
milp::solution_binding bind_graph(const model_bundle& bundle, const adder_graph& g);

// half-ulp budget for rounding the exact product of `target` to k bits
i64 half_ulp_budget(i64 target, int w_in, int k);

// variable naming scheme (documented in docs/formats.md)
namespace names {
std::string u(int a);
std::string c(int a);
std::string cnsh(int a);
std::string codd(int a);
std::string cin(int a, char side);
std::string csh_l(int a);
std::string cshsg(int a, char side);
std::string csel(int a, char side, int k);
std::string sigma(int a, int s);
std::string psi_neg(int a, int mag);
std::string phi(int a, char side);
std::string out(int a, std::size_t j);
std::string ad(int a);
std::string adin(int a, char side);
std::string admax();
std::string msb(int a);
std::string mu(int a, int m);
std::string msbin(int a, char side);
std::string maxhi(int a);
std::string psi(int a);
std::string dj(int a);
std::string djc(int a, int i);
std::string bpp(int a);
std::string gpp(int a);
std::string gain(int a);
std::string cost(int a);
std::string chi(int a);
std::string omg(int a);
std::string subneg(int a);
std::string t(int a, char side);
std::string tau(int a, char side, int v);
std::string pt(int a, char side);
std::string zin(int a, char side);
std::string qc(int a, char side);
std::string rho(int a, char side, int v);
std::string pq(int a, char side);
std::string low(int a, char side);
std::string lowm(int a);
std::string z(int a);
std::string eps_t(int a, char side);
std::string einf(int a, char side);
std::string esup(int a, char side);
std::string sinf(int a);
std::string ssup(int a);
std::string eps_inf(int a);
std::string eps_sup(int a);
std::string mls(int a);
std::string mlsr(int a);
}  // namespace names

}  // namespace mcm::models
