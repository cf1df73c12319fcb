#include "mcmopt/models.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "mcmopt/bnb.hpp"

namespace mcm::models {

using milp::lin_expr;
using milp::linearize;
using milp::model;
using milp::relation;
using milp::solution_binding;
using milp::var_id;

std::string to_string(metric m) {
  switch (m) {
    case metric::adders: return "adders";
    case metric::adders_ad: return "adders-ad";
    case metric::bits: return "bits";
    default: return "tmcm";
  }
}

std::optional<metric> metric_from_string(const std::string& s) {
  if (s == "adders") return metric::adders;
  if (s == "adders-ad" || s == "adders_ad") return metric::adders_ad;
  if (s == "bits") return metric::bits;
  if (s == "tmcm" || s == "truncated") return metric::truncated;
  return std::nullopt;
}

namespace names {
namespace {
std::string idx(const std::string& base, int a) { return base + "_" + std::to_string(a); }
std::string side_str(char s) { return std::string(1, s); }
}  // namespace
std::string u(int a) { return idx("u", a); }
std::string c(int a) { return idx("c", a); }
std::string cnsh(int a) { return idx("cnsh", a); }
std::string codd(int a) { return idx("codd", a); }
std::string cin(int a, char s) { return idx("cin", a) + "_" + side_str(s); }
std::string csh_l(int a) { return idx("csh", a) + "_l"; }
std::string cshsg(int a, char s) { return idx("cshsg", a) + "_" + side_str(s); }
std::string csel(int a, char s, int k) {
  return idx("csel", a) + "_" + side_str(s) + "_" + std::to_string(k);
}
std::string sigma(int a, int s) { return idx("sigma", a) + "_" + std::to_string(s); }
std::string psi_neg(int a, int mag) { return idx("psiNeg", a) + "_" + std::to_string(mag); }
std::string phi(int a, char s) { return idx("phi", a) + "_" + side_str(s); }
std::string out(int a, std::size_t j) { return idx("o", a) + "_" + std::to_string(j); }
std::string ad(int a) { return idx("ad", a); }
std::string adin(int a, char s) { return idx("adin", a) + "_" + side_str(s); }
std::string admax() { return "admax"; }
std::string msb(int a) { return idx("msb", a); }
std::string mu(int a, int m) { return idx("mu", a) + "_" + std::to_string(m); }
std::string msbin(int a, char s) { return idx("msbin", a) + "_" + side_str(s); }
std::string maxhi(int a) { return idx("maxhi", a); }
std::string psi(int a) { return idx("psi", a); }
std::string dj(int a) { return idx("dj", a); }
std::string djc(int a, int i) { return idx("djc", a) + "_" + std::to_string(i); }
std::string bpp(int a) { return idx("bpp", a); }
std::string gpp(int a) { return idx("gpp", a); }
std::string gain(int a) { return idx("g", a); }
std::string cost(int a) { return idx("B", a); }
std::string chi(int a) { return idx("chi", a); }
std::string omg(int a) { return idx("omg", a); }
std::string subneg(int a) { return idx("subneg", a); }
std::string t(int a, char s) { return idx("t", a) + "_" + side_str(s); }
std::string tau(int a, char s, int v) {
  return idx("tau", a) + "_" + side_str(s) + "_" + std::to_string(v);
}
std::string pt(int a, char s) { return idx("pt", a) + "_" + side_str(s); }
std::string zin(int a, char s) { return idx("zin", a) + "_" + side_str(s); }
std::string qc(int a, char s) { return idx("qc", a) + "_" + side_str(s); }
std::string rho(int a, char s, int v) {
  return idx("rho", a) + "_" + side_str(s) + "_" + std::to_string(v);
}
std::string pq(int a, char s) { return idx("pq", a) + "_" + side_str(s); }
std::string low(int a, char s) { return idx("low", a) + "_" + side_str(s); }
std::string lowm(int a) { return idx("lowm", a); }
std::string z(int a) { return idx("z", a); }
std::string eps_t(int a, char s) { return idx("epsT", a) + "_" + side_str(s); }
std::string einf(int a, char s) { return idx("einf", a) + "_" + side_str(s); }
std::string esup(int a, char s) { return idx("esup", a) + "_" + side_str(s); }
std::string sinf(int a) { return idx("sinf", a); }
std::string ssup(int a) { return idx("ssup", a); }
std::string eps_inf(int a) { return idx("epsInf", a); }
std::string eps_sup(int a) { return idx("epsSup", a); }
std::string mls(int a) { return idx("mls", a); }
std::string mlsr(int a) { return idx("mlsr", a); }
}  // namespace names

namespace vn = names;

i64 half_ulp_budget(i64 target, int w_in, int k) {
  if (target == 0) throw error("half_ulp_budget", "zero target");
  if (w_in < 1 || k < 1) throw error("half_ulp_budget", "wordlengths must be positive");
  i64 xbar = pow2(w_in) - 1;
  int msb = floor_log2(xbar * (target < 0 ? -target : target));
  if (msb < k) return 0;  // the format already carries the full product
  return pow2(msb - k);
}

normalized_instance normalize(const instance& inst) {
  normalized_instance ni;
  ni.raw = inst;
  bool want_budgets = inst.objective == metric::truncated;
  if (want_budgets && inst.error_budgets.size() != inst.targets.size())
    throw error("normalize", "one error budget per target is required for the truncated metric");

  std::vector<i64> kept_budgets;
  for (std::size_t i = 0; i < inst.targets.size(); ++i) {
    if (inst.targets[i] == 0) continue;  // a zero target needs no adder and no wire
    ni.target_map.push_back(normalize_constant(inst.targets[i]));
    if (want_budgets) {
      if (inst.error_budgets[i] < 0) throw error("normalize", "negative error budget");
      kept_budgets.push_back(inst.error_budgets[i]);
    }
  }
  if (ni.target_map.empty()) throw error("normalize", "no nonzero targets");

  for (std::size_t i = 0; i < ni.target_map.size(); ++i) {
    i64 odd = ni.target_map[i].odd;
    i64 node_budget =
        want_budgets ? kept_budgets[i] >> std::min(ni.target_map[i].shift, 62) : 0;
    auto it = std::find(ni.odd_targets.begin(), ni.odd_targets.end(), odd);
    if (it == ni.odd_targets.end()) {
      ni.odd_targets.push_back(odd);
      ni.node_budgets.push_back(node_budget);
    } else if (want_budgets) {
      std::size_t j = static_cast<std::size_t>(it - ni.odd_targets.begin());
      ni.node_budgets[j] = std::min(ni.node_budgets[j], node_budget);
    }
  }

  i64 max_odd = *std::max_element(ni.odd_targets.begin(), ni.odd_targets.end());
  int w_needed = max_odd == 1 ? 1 : ceil_log2(max_odd);
  ni.w = inst.wordlength.value_or(w_needed);
  if (ni.w < w_needed)
    throw error("normalize", "wordlength " + std::to_string(ni.w) +
                                 " too small for target fundamental " + std::to_string(max_odd));
  if (ni.w > 24) throw error("normalize", "wordlength above the supported desk scale (24)");
  ni.s_max = inst.max_shift.value_or(ni.w);
  ni.s_min = inst.min_shift.value_or(-(ni.w + 1));
  if (ni.s_max < 1 || ni.s_min > 0 || ni.s_min < -48)
    throw error("normalize", "shift bounds out of range");

  std::vector<i64> bound_input;
  for (i64 o : ni.odd_targets)
    if (o != 1) bound_input.push_back(o);
  i64 csd_bound = adder_count_upper_bound(bound_input);
  ni.adder_bound = inst.adder_bound.value_or(csd_bound);
  if (ni.adder_bound < 0 || ni.adder_bound > 40)
    throw error("normalize", "adder bound out of the supported range");

  bool want_win = inst.objective == metric::bits || inst.objective == metric::truncated;
  if (want_win && !inst.input_wordlength)
    throw error("normalize", "input wordlength is required for the " +
                                 to_string(inst.objective) + " metric");
  ni.w_in = inst.input_wordlength.value_or(0);
  if (ni.w_in < 0 || ni.w_in > 20) throw error("normalize", "input wordlength out of range");
  ni.xbar = ni.w_in > 0 ? pow2(ni.w_in) - 1 : 1;
  return ni;
}

namespace {

constexpr char kSides[2] = {'l', 'r'};

struct builder {
  model_bundle& mb;
  model& m;
  const normalized_instance& ni;
  linearize mode;
  int N;

  var_id mk(const std::string& name, milp::var_kind kind, i64 lo, i64 hi,
            const std::string& role) {
    var_id id = m.add_var(name, kind, lo, hi);
    mb.decode_map[name] = role;
    return id;
  }
  var_id bin(const std::string& name, const std::string& role) {
    return mk(name, milp::var_kind::binary, 0, 1, role);
  }
  var_id num(const std::string& name, i64 lo, i64 hi, const std::string& role) {
    return mk(name, milp::var_kind::integer, lo, hi, role);
  }
  var_id v(const std::string& name) const { return m.lookup(name); }

  lin_expr shift_expr(int a) const {  // s_{a,l} as a linear expression
    lin_expr e;
    for (int s = 1; s <= ni.s_max; ++s) e.add(s, v(vn::sigma(a, s)));
    return e;
  }
  lin_expr neg_shift_expr(int a) const {  // |s_a|
    lin_expr e;
    for (int k = 1; k <= -ni.s_min; ++k) e.add(k, v(vn::psi_neg(a, k)));
    return e;
  }
};

void build_topology(builder& b) {
  model& m = b.m;
  const normalized_instance& ni = b.ni;
  int N = b.N;
  i64 cmax = pow2(ni.w);

  b.num(vn::c(0), 1, 1, "input fundamental");
  for (int a = 1; a <= N; ++a) b.bin(vn::u(a), "usage[" + std::to_string(a) + "]");
  for (int a = 1; a <= N; ++a) {
    for (char s : kSides)
      for (int k = 0; k < a; ++k)
        b.bin(vn::csel(a, s, k), "input_select");
    for (int s = 0; s <= ni.s_max; ++s) b.bin(vn::sigma(a, s), "left_shift_select");
    for (int k = 0; k <= -ni.s_min; ++k) b.bin(vn::psi_neg(a, k), "neg_shift_select");
    b.bin(vn::phi(a, 'l'), "sign_left");
    b.bin(vn::phi(a, 'r'), "sign_right");
    b.num(vn::c(a), 0, cmax, "fundamental");
    b.num(vn::cnsh(a), 0, 2 * cmax, "pre_shift_sum");
    b.num(vn::codd(a), 0, cmax / 2, "oddness_witness");
    b.num(vn::cin(a, 'l'), 0, cmax, "left_input");
    b.num(vn::cin(a, 'r'), 0, cmax, "right_input");
    b.num(vn::csh_l(a), 0, 2 * cmax, "left_input_shifted");
    b.num(vn::cshsg(a, 'l'), -2 * cmax, 2 * cmax, "left_signed");
    b.num(vn::cshsg(a, 'r'), -2 * cmax, 2 * cmax, "right_signed");
  }
  for (std::size_t j = 0; j < ni.odd_targets.size(); ++j) {
    if (ni.odd_targets[j] == 1) b.bin(vn::out(0, j), "output_on_input");
    for (int a = 1; a <= N; ++a) b.bin(vn::out(a, j), "output_select");
  }

  for (int a = 1; a <= N; ++a) {
    std::string as = std::to_string(a);
    // C1: sum of the shifted and signed inputs
    m.add("C1_" + as,
          lin_expr(b.v(vn::cnsh(a))).add(-1, b.v(vn::cshsg(a, 'l'))).add(-1, b.v(vn::cshsg(a, 'r'))),
          relation::eq, 0);
    // C2: negative shift application
    for (int k = 0; k <= -ni.s_min; ++k)
      milp::add_indicator(m, b.v(vn::psi_neg(a, k)), 1,
                          lin_expr(b.v(vn::cnsh(a))).add(-pow2(k), b.v(vn::c(a))), relation::eq, 0,
                          b.mode, "C2_" + as + "_" + std::to_string(k));
    // C3: exactly one negative shift
    {
      lin_expr e;
      for (int k = 0; k <= -ni.s_min; ++k) e.add(1, b.v(vn::psi_neg(a, k)));
      m.add("C3_" + as, std::move(e), relation::eq, 1);
    }
    // C4: a negative shift only happens without a left shift
    {
      lin_expr e(b.v(vn::sigma(a, 0)));
      for (int k = 1; k <= -ni.s_min; ++k) e.add(-1, b.v(vn::psi_neg(a, k)));
      m.add("C4_" + as, std::move(e), relation::eq, 0);
    }
    // C5: oddness; deactivated adders sit at zero
    m.add("C5_" + as,
          lin_expr(b.v(vn::c(a))).add(-2, b.v(vn::codd(a))).add(-1, b.v(vn::u(a))), relation::eq,
          0);
    // C6/C7: input selection
    for (char s : kSides) {
      lin_expr sum;
      for (int k = 0; k < a; ++k) {
        sum.add(1, b.v(vn::csel(a, s, k)));
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1,
                            lin_expr(b.v(vn::cin(a, s))).add(-1, b.v(vn::c(k))), relation::eq, 0,
                            b.mode, std::string("C6_") + as + "_" + s + "_" + std::to_string(k));
        if (k >= 1)
          m.add(std::string("sel_used_") + as + "_" + s + "_" + std::to_string(k),
                lin_expr(b.v(vn::csel(a, s, k))).add(-1, b.v(vn::u(k))), relation::le, 0);
      }
      m.add(std::string("C7_") + as + "_" + s, std::move(sum), relation::eq, 1);
    }
    // C8/C9: left shift table
    for (int s = 0; s <= ni.s_max; ++s)
      milp::add_indicator(m, b.v(vn::sigma(a, s)), 1,
                          lin_expr(b.v(vn::csh_l(a))).add(-pow2(s), b.v(vn::cin(a, 'l'))),
                          relation::eq, 0, b.mode, "C8_" + as + "_" + std::to_string(s));
    {
      lin_expr e;
      for (int s = 0; s <= ni.s_max; ++s) e.add(1, b.v(vn::sigma(a, s)));
      m.add("C9_" + as, std::move(e), relation::eq, 1);
    }
    // C10: signs
    for (char s : kSides) {
      var_id raw = s == 'l' ? b.v(vn::csh_l(a)) : b.v(vn::cin(a, 'r'));
      milp::add_indicator(m, b.v(vn::phi(a, s)), 1,
                          lin_expr(b.v(vn::cshsg(a, s))).add(1, raw), relation::eq, 0, b.mode,
                          std::string("C10n_") + as + "_" + s);
      milp::add_indicator(m, b.v(vn::phi(a, s)), 0,
                          lin_expr(b.v(vn::cshsg(a, s))).add(-1, raw), relation::eq, 0, b.mode,
                          std::string("C10p_") + as + "_" + s);
    }
    // never subtract both operands
    m.add("signs_" + as, lin_expr(b.v(vn::phi(a, 'l'))).add(1, b.v(vn::phi(a, 'r'))), relation::le,
          1);
    // usage coupling
    m.add("use_up_" + as, lin_expr(b.v(vn::c(a))).add(-cmax, b.v(vn::u(a))), relation::le, 0);
    m.add("use_lo_" + as, lin_expr(b.v(vn::c(a))).add(-1, b.v(vn::u(a))), relation::ge, 0);
    if (ni.raw.symmetry_breaking && a >= 2)
      m.add("sym_" + as, lin_expr(b.v(vn::u(a))).add(-1, b.v(vn::u(a - 1))), relation::le, 0);
  }

  // C11/C12: every target is computed once and only once
  for (std::size_t j = 0; j < ni.odd_targets.size(); ++j) {
    lin_expr sum;
    if (ni.odd_targets[j] == 1) sum.add(1, b.v(vn::out(0, j)));
    for (int a = 1; a <= N; ++a) {
      sum.add(1, b.v(vn::out(a, j)));
      milp::add_indicator(m, b.v(vn::out(a, j)), 1, lin_expr(b.v(vn::c(a))), relation::eq,
                          ni.odd_targets[j], b.mode,
                          "C11_" + std::to_string(a) + "_" + std::to_string(j));
      m.add("out_used_" + std::to_string(a) + "_" + std::to_string(j),
            lin_expr(b.v(vn::out(a, j))).add(-1, b.v(vn::u(a))), relation::le, 0);
    }
    m.add("C12_" + std::to_string(j), std::move(sum), relation::eq, 1);
  }
}

void build_depth(builder& b) {
  model& m = b.m;
  int N = b.N;
  b.num(vn::ad(0), 0, 0, "adder_depth");
  for (int a = 1; a <= N; ++a) {
    b.num(vn::ad(a), 1, N, "adder_depth");
    b.num(vn::adin(a, 'l'), 0, N - 1, "left_input_depth");
    b.num(vn::adin(a, 'r'), 0, N - 1, "right_input_depth");
  }
  b.num(vn::admax(), 0, N, "max_adder_depth");
  for (int a = 1; a <= N; ++a) {
    std::string as = std::to_string(a);
    for (char s : kSides)
      for (int k = 0; k < a; ++k)
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1,
                            lin_expr(b.v(vn::adin(a, s))).add(-1, b.v(vn::ad(k))), relation::eq, 0,
                            b.mode, std::string("adprop_") + as + "_" + s + "_" + std::to_string(k));
    lin_expr left(b.v(vn::adin(a, 'l')));
    left.constant = 1;
    lin_expr right(b.v(vn::adin(a, 'r')));
    right.constant = 1;
    milp::encode_max(m, b.v(vn::ad(a)), {left, right}, b.mode, "admax_" + as);
    milp::add_indicator(m, b.v(vn::u(a)), 1,
                        lin_expr(b.v(vn::admax())).add(-1, b.v(vn::ad(a))), relation::ge, 0,
                        b.mode, "adceil_" + as);
    for (std::size_t j = 0; j < b.ni.odd_targets.size(); ++j) {
      int lb = ad_lower_bound(b.ni.odd_targets[j]);
      if (lb > 0)
        m.add("adcut_" + as + "_" + std::to_string(j),
              lin_expr(b.v(vn::ad(a))).add(-lb, b.v(vn::out(a, j))), relation::ge, 0);
    }
  }
  if (b.ni.raw.ad_bound) {
    int bound = *b.ni.raw.ad_bound;
    int need = 0;
    for (i64 t : b.ni.odd_targets) need = std::max(need, ad_lower_bound(t));
    if (bound < need)
      throw error("build_mcm_ad", "ad bound " + std::to_string(bound) +
                                      " is below the depth lower bound " + std::to_string(need) +
                                      " of a target; the model is infeasible");
    m.add("adbound", lin_expr(b.v(vn::admax())), relation::le, bound);
  }
}

// one-bit adder accounting shared by the bits and truncated flavors
void build_bits(builder& b, bool trunc) {
  model& m = b.m;
  const normalized_instance& ni = b.ni;
  int N = b.N;
  i64 eps_max = 0;
  if (trunc)
    for (i64 bud : ni.node_budgets) eps_max = std::max(eps_max, bud);
  int msb_max = floor_log2(ni.xbar * (pow2(ni.w) - 1) + eps_max);
  int t_max = msb_max + 1;
  int maxhi_max = msb_max + ni.s_max + 2;
  int z_max = msb_max + ni.s_max + 2;
  b.mb.msb_max = msb_max;
  b.mb.t_max = t_max;
  b.mb.eps_max = eps_max;
  int msb0 = floor_log2(ni.xbar);

  for (int a = 1; a <= N; ++a) {
    b.num(vn::msb(a), 0, msb_max, "msb");
    for (int mm = 0; mm <= msb_max; ++mm) b.bin(vn::mu(a, mm), "msb_onehot");
    b.num(vn::msbin(a, 'l'), 0, msb_max, "left_input_msb");
    b.num(vn::msbin(a, 'r'), 0, msb_max, "right_input_msb");
    b.num(vn::maxhi(a), 0, maxhi_max, "aligned_operand_top");
    b.bin(vn::bpp(a), "both_plus");
    b.bin(vn::dj(a), "operands_disjoint");
    b.bin(vn::djc(a, 0), "disjoint_shift");
    if (trunc) {
      b.bin(vn::djc(a, 1), "disjoint_trunc_left");
      b.bin(vn::djc(a, 2), "disjoint_trunc_right");
    }
    b.bin(vn::psi(a), "carry_msb");
    b.bin(vn::chi(a), "carry_msb_and_overlap");
    b.bin(vn::omg(a), "no_carry_msb_witness");
    b.bin(vn::gpp(a), "gain_case_plus");
    b.num(vn::gain(a), 0, std::max(maxhi_max, msb_max) + 2, "onebit_gain");
    b.num(vn::cost(a), 0, msb_max + 1, "onebit_cost");
    if (trunc) {
      for (char s : kSides) {
        b.num(vn::t(a, s), 0, t_max, "truncation");
        for (int v = 0; v <= t_max; ++v) b.bin(vn::tau(a, s, v), "truncation_onehot");
        b.num(vn::pt(a, s), 1, pow2(t_max), "pow2_truncation");
        b.num(vn::zin(a, s), 0, z_max, "input_trailing_zeros");
        b.num(vn::qc(a, s), 0, t_max, "trailing_zeros_capped");
        for (int v = 0; v <= t_max; ++v) b.bin(vn::rho(a, s, v), "trailing_onehot");
        b.num(vn::pq(a, s), 1, pow2(t_max), "pow2_trailing");
        b.num(vn::low(a, s), 0, z_max + ni.s_max + 1, "operand_low");
        b.num(vn::eps_t(a, s), 0, pow2(t_max), "truncation_error");
        b.num(vn::einf(a, s), 0, eps_max, "input_eps_inf");
        b.num(vn::esup(a, s), 0, eps_max, "input_eps_sup");
      }
      b.num(vn::lowm(a), 0, z_max + ni.s_max + 1, "low_min");
      b.num(vn::z(a), 0, z_max, "trailing_zeros");
      b.num(vn::sinf(a), 0, eps_max, "left_eps_inf_shifted");
      b.num(vn::ssup(a), 0, eps_max, "left_eps_sup_shifted");
      b.num(vn::eps_inf(a), 0, eps_max, "eps_inf");
      b.num(vn::eps_sup(a), 0, eps_max, "eps_sup");
      b.num(vn::mls(a), 0, std::max(t_max, ni.s_max), "max_tl_sl");
      b.num(vn::mlsr(a), 0, std::max(t_max, ni.s_max), "max_tl_sl_tr");
      b.bin(vn::subneg(a), "has_subtraction");
    }
  }

  for (int a = 1; a <= N; ++a) {
    std::string as = std::to_string(a);
    lin_expr sexpr = b.shift_expr(a);

    // binade pin: mu selects msb with xbar*c + epsSup in [2^m, 2^{m+1})
    {
      lin_expr onehot, weighted;
      for (int mm = 0; mm <= msb_max; ++mm) {
        onehot.add(1, b.v(vn::mu(a, mm)));
        weighted.add(mm, b.v(vn::mu(a, mm)));
        lin_expr prod(ni.xbar, b.v(vn::c(a)));
        if (trunc) prod.add(1, b.v(vn::eps_sup(a)));
        lin_expr lower = prod;
        lower.add(-pow2(mm), b.v(vn::u(a)));
        milp::add_indicator(m, b.v(vn::mu(a, mm)), 1, std::move(lower), relation::ge, 0, b.mode,
                            "binade_lo_" + as + "_" + std::to_string(mm));
        milp::add_indicator(m, b.v(vn::mu(a, mm)), 1, std::move(prod), relation::le,
                            pow2(mm + 1) - 1, b.mode, "binade_up_" + as + "_" + std::to_string(mm));
      }
      m.add("mu_onehot_" + as, std::move(onehot), relation::eq, 1);
      weighted.add(-1, b.v(vn::msb(a)));
      m.add("mu_value_" + as, std::move(weighted), relation::eq, 0);
      m.add("msb_unused_" + as, lin_expr(b.v(vn::msb(a))).add(-msb_max, b.v(vn::u(a))),
            relation::le, 0);
    }

    // operand msb propagation through the input selection
    for (char s : kSides)
      for (int k = 0; k < a; ++k) {
        lin_expr body(b.v(vn::msbin(a, s)));
        i64 rhs = 0;
        if (k == 0)
          rhs = msb0;
        else
          body.add(-1, b.v(vn::msb(k)));
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1, std::move(body), relation::eq, rhs,
                            b.mode, std::string("msbprop_") + as + "_" + s + "_" + std::to_string(k));
      }

    lin_expr hi_l = sexpr;
    hi_l.add(1, b.v(vn::msbin(a, 'l')));
    lin_expr hi_r(b.v(vn::msbin(a, 'r')));
    milp::encode_max(m, b.v(vn::maxhi(a)), {hi_l, hi_r}, b.mode, "maxhi_" + as);

    // both-plus marker
    m.add("bpp_a_" + as, lin_expr(b.v(vn::bpp(a))).add(1, b.v(vn::phi(a, 'l'))), relation::le, 1);
    m.add("bpp_b_" + as, lin_expr(b.v(vn::bpp(a))).add(1, b.v(vn::phi(a, 'r'))), relation::le, 1);
    m.add("bpp_c_" + as,
          lin_expr(b.v(vn::bpp(a))).add(1, b.v(vn::phi(a, 'l'))).add(1, b.v(vn::phi(a, 'r'))),
          relation::ge, 1);

    // no-overlap detection: a left shift clearing the right operand's msb,
    // plus the analogous truncation-induced separations
    std::vector<var_id> atomics;
    {
      lin_expr cond = sexpr;
      cond.add(-1, b.v(vn::msbin(a, 'r')));
      var_id c0 = b.v(vn::djc(a, 0));
      milp::add_indicator(m, c0, 1, cond, relation::ge, 1, b.mode, "djc0_on_" + as);
      milp::add_indicator(m, c0, 0, std::move(cond), relation::le, 0, b.mode, "djc0_off_" + as);
      atomics.push_back(c0);
    }
    if (trunc) {
      {
        lin_expr cond(b.v(vn::t(a, 'l')));
        cond.add(-1, b.v(vn::msbin(a, 'r')));
        var_id c1 = b.v(vn::djc(a, 1));
        milp::add_indicator(m, c1, 1, cond, relation::ge, 1, b.mode, "djc1_on_" + as);
        milp::add_indicator(m, c1, 0, std::move(cond), relation::le, 0, b.mode, "djc1_off_" + as);
        atomics.push_back(c1);
      }
      {
        lin_expr cond(b.v(vn::t(a, 'r')));
        cond.sub(sexpr);
        cond.add(-1, b.v(vn::msbin(a, 'l')));
        var_id c2 = b.v(vn::djc(a, 2));
        milp::add_indicator(m, c2, 1, cond, relation::ge, 1, b.mode, "djc2_on_" + as);
        milp::add_indicator(m, c2, 0, std::move(cond), relation::le, 0, b.mode, "djc2_off_" + as);
        atomics.push_back(c2);
      }
    }
    {
      var_id dj = b.v(vn::dj(a));
      lin_expr any;
      for (var_id c : atomics) {
        any.add(1, c);
        // dj >= atomic - (1 - bpp)
        m.add("dj_ge_" + as + "_" + std::to_string(c),
              lin_expr(dj).add(-1, c).add(-1, b.v(vn::bpp(a))), relation::ge, -1);
      }
      m.add("dj_le_any_" + as, lin_expr(dj).sub(any), relation::le, 0);
      m.add("dj_le_bpp_" + as, lin_expr(dj).add(-1, b.v(vn::bpp(a))), relation::le, 0);
    }

    // carry-out accounting: psi = 1 iff the output msb sits above both
    // aligned operands (and by convention when the operands are disjoint)
    {
      var_id psi = b.v(vn::psi(a)), dj = b.v(vn::dj(a)), chi = b.v(vn::chi(a)),
             omg = b.v(vn::omg(a));
      m.add("psi_bpp_" + as, lin_expr(psi).add(-1, b.v(vn::bpp(a))), relation::le, 0);
      m.add("psi_dj_" + as, lin_expr(psi).add(-1, dj), relation::ge, 0);
      m.add("chi_a_" + as, lin_expr(chi).add(-1, psi), relation::le, 0);
      m.add("chi_b_" + as, lin_expr(chi).add(1, dj), relation::le, 1);
      m.add("chi_c_" + as, lin_expr(chi).add(-1, psi).add(1, dj), relation::ge, 0);
      milp::add_indicator(m, chi, 1,
                          lin_expr(b.v(vn::msb(a))).add(-1, b.v(vn::maxhi(a))), relation::ge, 1,
                          b.mode, "psi_need_" + as);
      m.add("omg_a_" + as, lin_expr(omg).add(-1, b.v(vn::bpp(a))), relation::le, 0);
      m.add("omg_b_" + as, lin_expr(omg).add(1, psi), relation::le, 1);
      m.add("omg_c_" + as, lin_expr(omg).add(1, dj), relation::le, 1);
      m.add("omg_d_" + as,
            lin_expr(omg).add(-1, b.v(vn::bpp(a))).add(1, psi).add(1, dj), relation::ge, 0);
      milp::add_indicator(m, omg, 1, lin_expr(b.v(vn::msb(a))).add(-1, b.v(vn::maxhi(a))),
                          relation::le, 0, b.mode, "psi_deny_" + as);
    }

    // gain cases; gpp = both-plus overlap
    {
      var_id gpp = b.v(vn::gpp(a)), dj = b.v(vn::dj(a));
      m.add("gpp_a_" + as, lin_expr(gpp).add(-1, b.v(vn::bpp(a))), relation::le, 0);
      m.add("gpp_b_" + as, lin_expr(gpp).add(1, dj), relation::le, 1);
      m.add("gpp_c_" + as, lin_expr(gpp).add(-1, b.v(vn::bpp(a))).add(1, dj), relation::ge, 0);
      milp::add_indicator(m, dj, 1, lin_expr(b.v(vn::gain(a))).add(-1, b.v(vn::msb(a))),
                          relation::eq, 0, b.mode, "gain_dj_" + as);
      if (trunc) {
        milp::encode_max(m, b.v(vn::mls(a)), {lin_expr(b.v(vn::t(a, 'l'))), sexpr}, b.mode,
                         "mls_" + as);
        milp::encode_max(m, b.v(vn::mlsr(a)),
                         {lin_expr(b.v(vn::mls(a))), lin_expr(b.v(vn::t(a, 'r')))}, b.mode,
                         "mlsr_" + as);
        milp::add_indicator(m, gpp, 1, lin_expr(b.v(vn::gain(a))).add(-1, b.v(vn::mlsr(a))),
                            relation::eq, 0, b.mode, "gain_pp_" + as);
        milp::add_indicator(m, b.v(vn::phi(a, 'l')), 1,
                            lin_expr(b.v(vn::gain(a))).add(-1, b.v(vn::mls(a))), relation::eq, 0,
                            b.mode, "gain_lneg_" + as);
        milp::add_indicator(m, b.v(vn::phi(a, 'r')), 1,
                            lin_expr(b.v(vn::gain(a))).add(-1, b.v(vn::t(a, 'r'))), relation::eq,
                            0, b.mode, "gain_rneg_" + as);
      } else {
        lin_expr body(b.v(vn::gain(a)));
        body.sub(sexpr);
        milp::add_indicator(m, gpp, 1, body, relation::eq, 0, b.mode, "gain_pp_" + as);
        milp::add_indicator(m, b.v(vn::phi(a, 'l')), 1, std::move(body), relation::eq, 0, b.mode,
                            "gain_lneg_" + as);
        milp::add_indicator(m, b.v(vn::phi(a, 'r')), 1, lin_expr(b.v(vn::gain(a))), relation::eq,
                            0, b.mode, "gain_rneg_" + as);
      }
    }

    // B_a = msb + 1 - g - psi for used adders, 0 otherwise
    milp::add_indicator(m, b.v(vn::u(a)), 1,
                        lin_expr(b.v(vn::cost(a)))
                            .add(-1, b.v(vn::msb(a)))
                            .add(1, b.v(vn::gain(a)))
                            .add(1, b.v(vn::psi(a))),
                        relation::eq, 1, b.mode, "cost_eq_" + as);
    milp::add_indicator(m, b.v(vn::u(a)), 0, lin_expr(b.v(vn::cost(a))), relation::eq, 0, b.mode,
                        "cost_zero_" + as);

    if (!trunc) continue;

    // truncation machinery ------------------------------------------------
    for (char s : kSides) {
      std::string ss(1, s);
      // one-hot value and power tables for t
      lin_expr onehot, val, pw;
      for (int v = 0; v <= t_max; ++v) {
        onehot.add(1, b.v(vn::tau(a, s, v)));
        val.add(v, b.v(vn::tau(a, s, v)));
        pw.add(pow2(v), b.v(vn::tau(a, s, v)));
      }
      m.add("tau_onehot_" + as + "_" + ss, std::move(onehot), relation::eq, 1);
      val.add(-1, b.v(vn::t(a, s)));
      m.add("tau_value_" + as + "_" + ss, std::move(val), relation::eq, 0);
      pw.add(-1, b.v(vn::pt(a, s)));
      m.add("tau_pow_" + as + "_" + ss, std::move(pw), relation::eq, 0);
      // unused adders truncate nothing
      m.add("t_unused_" + as + "_" + ss,
            lin_expr(b.v(vn::t(a, s))).add(-t_max, b.v(vn::u(a))), relation::le, 0);
      // trailing zeros of the selected input
      for (int k = 0; k < a; ++k) {
        lin_expr body(b.v(vn::zin(a, s)));
        if (k > 0) body.add(-1, b.v(vn::z(k)));
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1, std::move(body), relation::eq, 0, b.mode,
                            "zprop_" + as + "_" + ss + "_" + std::to_string(k));
      }
      // input error selection
      for (int k = 0; k < a; ++k) {
        lin_expr binf(b.v(vn::einf(a, s))), bsup(b.v(vn::esup(a, s)));
        if (k > 0) {
          binf.add(-1, b.v(vn::eps_inf(k)));
          bsup.add(-1, b.v(vn::eps_sup(k)));
        }
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1, std::move(binf), relation::eq, 0, b.mode,
                            "einfprop_" + as + "_" + ss + "_" + std::to_string(k));
        milp::add_indicator(m, b.v(vn::csel(a, s, k)), 1, std::move(bsup), relation::eq, 0, b.mode,
                            "esupprop_" + as + "_" + ss + "_" + std::to_string(k));
      }
    }

    // q = trailing zeros after the left shift; capped at t_max for the
    // power table (beyond the cap the truncation error is zero anyway)
    lin_expr q_l(b.v(vn::zin(a, 'l')));
    q_l.add(sexpr);
    lin_expr q_r(b.v(vn::zin(a, 'r')));
    lin_expr cap;
    cap.constant = t_max;
    milp::encode_min(m, b.v(vn::qc(a, 'l')), {q_l, cap}, b.mode, "qcap_" + as + "_l");
    milp::encode_min(m, b.v(vn::qc(a, 'r')), {q_r, cap}, b.mode, "qcap_" + as + "_r");
    for (char s : kSides) {
      std::string ss(1, s);
      lin_expr onehot, val, pw;
      for (int v = 0; v <= t_max; ++v) {
        onehot.add(1, b.v(vn::rho(a, s, v)));
        val.add(v, b.v(vn::rho(a, s, v)));
        pw.add(pow2(v), b.v(vn::rho(a, s, v)));
      }
      m.add("rho_onehot_" + as + "_" + ss, std::move(onehot), relation::eq, 1);
      val.add(-1, b.v(vn::qc(a, s)));
      m.add("rho_value_" + as + "_" + ss, std::move(val), relation::eq, 0);
      pw.add(-1, b.v(vn::pq(a, s)));
      m.add("rho_pow_" + as + "_" + ss, std::move(pw), relation::eq, 0);
      // epsT = max(2^t - 2^q, 0)
      lin_expr diff(b.v(vn::pt(a, s)));
      diff.add(-1, b.v(vn::pq(a, s)));
      lin_expr zero;
      milp::encode_max(m, b.v(vn::eps_t(a, s)), {diff, zero}, b.mode, "epsT_" + as + "_" + ss);
    }

    // trailing zeros of the node value
    milp::encode_max(m, b.v(vn::low(a, 'l')), {q_l, lin_expr(b.v(vn::t(a, 'l')))}, b.mode,
                     "lowl_" + as);
    milp::encode_max(m, b.v(vn::low(a, 'r')), {q_r, lin_expr(b.v(vn::t(a, 'r')))}, b.mode,
                     "lowr_" + as);
    milp::encode_min(m, b.v(vn::lowm(a)),
                     {lin_expr(b.v(vn::low(a, 'l'))), lin_expr(b.v(vn::low(a, 'r')))}, b.mode,
                     "lowm_" + as);
    {
      lin_expr shifted(b.v(vn::lowm(a)));
      shifted.sub(b.neg_shift_expr(a));
      lin_expr zero;
      milp::encode_max(m, b.v(vn::z(a)), {shifted, zero}, b.mode, "z_" + as);
    }

    // shifted left error contributions
    for (int s = 0; s <= ni.s_max; ++s) {
      milp::add_indicator(m, b.v(vn::sigma(a, s)), 1,
                          lin_expr(b.v(vn::sinf(a))).add(-pow2(s), b.v(vn::einf(a, 'l'))),
                          relation::eq, 0, b.mode, "sinf_" + as + "_" + std::to_string(s));
      milp::add_indicator(m, b.v(vn::sigma(a, s)), 1,
                          lin_expr(b.v(vn::ssup(a))).add(-pow2(s), b.v(vn::esup(a, 'l'))),
                          relation::eq, 0, b.mode, "ssup_" + as + "_" + std::to_string(s));
    }

    // sign-case propagation: truncation applies before negation, a minus
    // sign swaps the operand's deviation bounds
    {
      lin_expr inf_pp(b.v(vn::eps_inf(a)));
      inf_pp.add(-1, b.v(vn::sinf(a))).add(-1, b.v(vn::eps_t(a, 'l')));
      inf_pp.add(-1, b.v(vn::einf(a, 'r'))).add(-1, b.v(vn::eps_t(a, 'r')));
      milp::add_indicator(m, b.v(vn::bpp(a)), 1, std::move(inf_pp), relation::eq, 0, b.mode,
                          "epsinf_pp_" + as);
      lin_expr sup_pp(b.v(vn::eps_sup(a)));
      sup_pp.add(-1, b.v(vn::ssup(a))).add(-1, b.v(vn::esup(a, 'r')));
      milp::add_indicator(m, b.v(vn::bpp(a)), 1, std::move(sup_pp), relation::eq, 0, b.mode,
                          "epssup_pp_" + as);

      lin_expr inf_ln(b.v(vn::eps_inf(a)));
      inf_ln.add(-1, b.v(vn::ssup(a)));
      inf_ln.add(-1, b.v(vn::einf(a, 'r'))).add(-1, b.v(vn::eps_t(a, 'r')));
      milp::add_indicator(m, b.v(vn::phi(a, 'l')), 1, std::move(inf_ln), relation::eq, 0, b.mode,
                          "epsinf_lneg_" + as);
      lin_expr sup_ln(b.v(vn::eps_sup(a)));
      sup_ln.add(-1, b.v(vn::sinf(a))).add(-1, b.v(vn::eps_t(a, 'l')));
      sup_ln.add(-1, b.v(vn::esup(a, 'r')));
      milp::add_indicator(m, b.v(vn::phi(a, 'l')), 1, std::move(sup_ln), relation::eq, 0, b.mode,
                          "epssup_lneg_" + as);

      lin_expr inf_rn(b.v(vn::eps_inf(a)));
      inf_rn.add(-1, b.v(vn::sinf(a))).add(-1, b.v(vn::eps_t(a, 'l')));
      inf_rn.add(-1, b.v(vn::esup(a, 'r')));
      milp::add_indicator(m, b.v(vn::phi(a, 'r')), 1, std::move(inf_rn), relation::eq, 0, b.mode,
                          "epsinf_rneg_" + as);
      lin_expr sup_rn(b.v(vn::eps_sup(a)));
      sup_rn.add(-1, b.v(vn::ssup(a)));
      sup_rn.add(-1, b.v(vn::einf(a, 'r'))).add(-1, b.v(vn::eps_t(a, 'r')));
      milp::add_indicator(m, b.v(vn::phi(a, 'r')), 1, std::move(sup_rn), relation::eq, 0, b.mode,
                          "epssup_rneg_" + as);
    }

    // keep the truncated datapath non-negative: for subtractions the worst
    // negative deviation may not exceed the smallest exact pre-shift value
    {
      var_id sn = b.v(vn::subneg(a));
      m.add("subneg_" + as,
            lin_expr(sn).add(-1, b.v(vn::phi(a, 'l'))).add(-1, b.v(vn::phi(a, 'r'))), relation::eq,
            0);
      milp::add_indicator(m, sn, 1, lin_expr(b.v(vn::eps_inf(a))).add(-1, b.v(vn::cnsh(a))),
                          relation::le, 0, b.mode, "nonneg_" + as);
    }

    // truncations stay within the operand word
    {
      lin_expr capl(b.v(vn::t(a, 'l')));
      capl.sub(sexpr);
      capl.add(-1, b.v(vn::msbin(a, 'l')));
      m.add("tcap_" + as + "_l", std::move(capl), relation::le, 0);
      m.add("tcap_" + as + "_r",
            lin_expr(b.v(vn::t(a, 'r'))).add(-1, b.v(vn::msbin(a, 'r'))), relation::le, 0);
    }

    // per-output budget constraints
    for (std::size_t j = 0; j < ni.odd_targets.size(); ++j) {
      milp::add_indicator(m, b.v(vn::out(a, j)), 1, lin_expr(b.v(vn::eps_inf(a))), relation::le,
                          ni.node_budgets[j], b.mode,
                          "budget_inf_" + as + "_" + std::to_string(j));
      milp::add_indicator(m, b.v(vn::out(a, j)), 1, lin_expr(b.v(vn::eps_sup(a))), relation::le,
                          ni.node_budgets[j], b.mode,
                          "budget_sup_" + as + "_" + std::to_string(j));
    }
  }
}

void set_objective_adders(builder& b) {
  lin_expr obj;
  for (int a = 1; a <= b.N; ++a) obj.add(1, b.v(vn::u(a)));
  b.m.objective = std::move(obj);
}

void set_objective_lex(builder& b, bool bits) {
  i64 weight = std::max<i64>(b.N, 1);
  lin_expr obj;
  for (int a = 1; a <= b.N; ++a) obj.add(weight, b.v(bits ? vn::cost(a) : vn::u(a)));
  obj.add(1, b.v(vn::admax()));
  b.m.objective = std::move(obj);
}

model_bundle build_common(const instance& inst, metric flavor) {
  model_bundle mb;
  mb.flavor = flavor;
  instance adjusted = inst;
  adjusted.objective = flavor;
  mb.inst = normalize(adjusted);
  if ((flavor == metric::bits || flavor == metric::truncated) && inst.adder_bound_slack)
    mb.inst.adder_bound += 1;
  mb.model.name = "mcm_" + to_string(flavor);
  std::ostringstream ts;
  for (std::size_t i = 0; i < mb.inst.odd_targets.size(); ++i)
    ts << (i ? "," : "") << mb.inst.odd_targets[i];
  mb.model.metadata["targets"] = ts.str();
  mb.model.metadata["adder_bound"] = std::to_string(mb.inst.adder_bound);
  mb.model.metadata["wordlength"] = std::to_string(mb.inst.w);
  if (flavor == metric::bits || flavor == metric::truncated)
    mb.model.metadata["input_wordlength"] = std::to_string(mb.inst.w_in);

  builder b{mb, mb.model, mb.inst, mb.inst.raw.lin_mode, static_cast<int>(mb.inst.adder_bound)};
  build_topology(b);
  if (flavor != metric::adders) build_depth(b);
  if (flavor == metric::bits || flavor == metric::truncated)
    build_bits(b, flavor == metric::truncated);
  if (flavor == metric::adders)
    set_objective_adders(b);
  else
    set_objective_lex(b, flavor != metric::adders_ad);
  return mb;
}

}  // namespace

model_bundle build_mcm_adders(const instance& inst) { return build_common(inst, metric::adders); }
model_bundle build_mcm_ad(const instance& inst) { return build_common(inst, metric::adders_ad); }
model_bundle build_mcm_bits(const instance& inst) { return build_common(inst, metric::bits); }
model_bundle build_tmcm(const instance& inst) { return build_common(inst, metric::truncated); }

adder_graph csd_expansion_graph(const normalized_instance& ni) {
  adder_graph g = adder_graph::with_input(std::max(ni.w_in, 1));
  std::map<i64, int> node_of{{1, 0}};
  for (i64 target : ni.odd_targets) {
    if (node_of.count(target)) continue;
    csd_form f = csd(target);
    std::vector<std::pair<int, int>> nz;  // (position, digit), descending
    for (int p = static_cast<int>(f.digits.size()) - 1; p >= 0; --p)
      if (f.digits[static_cast<std::size_t>(p)] != 0)
        nz.push_back({p, f.digits[static_cast<std::size_t>(p)]});
    i64 acc = 1;
    for (std::size_t i = 1; i < nz.size(); ++i) {
      int shift = nz[i - 1].first - nz[i].first;
      i64 next = (acc << shift) + nz[i].second;
      if (!node_of.count(next)) {
        adder_node n;
        n.index = static_cast<int>(g.adders.size()) + 1;
        n.left = node_of.at(acc);
        n.right = 0;
        n.left_shift = shift;
        n.sign_right = nz[i].second < 0 ? sign_bit::minus : sign_bit::plus;
        n.fundamental = next;
        g.adders.push_back(n);
        node_of[next] = n.index;
      }
      acc = next;
    }
  }
  for (const odd_normalized& t : ni.target_map)
    g.outputs.push_back({t.original, node_of.at(t.odd), t.shift, t.negated});
  return g;
}

milp::solution_binding complete_binding(const model_bundle& bundle,
                                        const std::map<std::string, i64>& fixed) {
  milp::model pinned = bundle.model;
  for (const auto& [name, value] : fixed) {
    var_id id = pinned.lookup(name);
    milp::var& v = pinned.vars[static_cast<std::size_t>(id)];
    if (value < v.lower || value > v.upper)
      throw error("complete_binding",
                  name + " = " + std::to_string(value) + " outside its domain");
    v.lower = v.upper = value;
  }
  bnb::options opt;
  opt.timeout_seconds = 120;
  opt.node_limit = 20'000'000;
  bnb::result res = bnb::solve(pinned, opt);
  if (res.binding.st != solution_binding::status::optimal &&
      res.binding.st != solution_binding::status::feasible_timeout)
    throw error("complete_binding", "structural assignment does not extend to a feasible binding");
  res.binding.st = solution_binding::status::feasible_timeout;
  milp::check_result chk = milp::check_binding(bundle.model, res.binding);
  if (!chk.ok) throw error("complete_binding", "completion failed a recheck: " + chk.first_violation);
  return res.binding;
}

milp::solution_binding bind_graph(const model_bundle& bundle, const adder_graph& g) {
  const normalized_instance& ni = bundle.inst;
  int N = static_cast<int>(ni.adder_bound);
  int n = static_cast<int>(g.adders.size());
  if (n > N) throw error("bind_graph", "graph uses more adders than the model allows");
  validation_report rep = validate(g);
  if (!rep.ok) throw error("bind_graph", "graph does not validate: " + rep.to_string());

  std::map<std::string, i64> fx;
  auto set = [&fx](const std::string& name, i64 v) { fx[name] = v; };

  for (int a = 1; a <= N; ++a) {
    bool used = a <= n;
    const adder_node* nd = used ? &g.adders[static_cast<std::size_t>(a - 1)] : nullptr;
    set(vn::u(a), used ? 1 : 0);
    set(vn::c(a), used ? nd->fundamental : 0);
    int left = used ? nd->left : 0;
    int right = used ? nd->right : 0;
    for (char s : kSides)
      for (int k = 0; k < a; ++k)
        set(vn::csel(a, s, k), k == (s == 'l' ? left : right) ? 1 : 0);
    int sl = used ? nd->left_shift : 0;
    for (int s = 0; s <= ni.s_max; ++s) set(vn::sigma(a, s), s == sl ? 1 : 0);
    int ns = used ? nd->neg_shift : 1;
    if (ns > -ni.s_min) throw error("bind_graph", "negative shift beyond the model's S_min");
    for (int k = 0; k <= -ni.s_min; ++k) set(vn::psi_neg(a, k), k == ns ? 1 : 0);
    bool pl = used ? nd->sign_left == sign_bit::minus : true;
    bool pr = used ? nd->sign_right == sign_bit::minus : false;
    set(vn::phi(a, 'l'), pl ? 1 : 0);
    set(vn::phi(a, 'r'), pr ? 1 : 0);
    if (bundle.flavor == metric::truncated) {
      set(vn::t(a, 'l'), used ? nd->trunc_left : 0);
      set(vn::t(a, 'r'), used ? nd->trunc_right : 0);
    }
  }
  for (std::size_t j = 0; j < ni.odd_targets.size(); ++j) {
    int found = -1;
    if (ni.odd_targets[j] == 1) found = 0;
    for (int a = 1; a <= n && found < 0; ++a)
      if (g.adders[static_cast<std::size_t>(a - 1)].fundamental == ni.odd_targets[j]) found = a;
    if (found < 0)
      throw error("bind_graph", "graph misses target " + std::to_string(ni.odd_targets[j]));
    if (ni.odd_targets[j] == 1) set(vn::out(0, j), 1);
    for (int a = 1; a <= N; ++a) set(vn::out(a, j), a == found ? 1 : 0);
  }
  return complete_binding(bundle, fx);
}

namespace {

[[noreturn]] void drift(const std::string& what) {
  throw error("decode", "model/decoder drift: " + what);
}

void expect_eq(i64 binding_value, i64 recomputed, const std::string& what) {
  if (binding_value != recomputed)
    drift(what + ": binding " + std::to_string(binding_value) + " vs recomputed " +
          std::to_string(recomputed));
}

}  // namespace

adder_graph decode(const model_bundle& bundle, const milp::solution_binding& binding) {
  const normalized_instance& ni = bundle.inst;
  int N = static_cast<int>(ni.adder_bound);
  adder_graph g = adder_graph::with_input(std::max(ni.w_in, 1));

  std::vector<int> remap(static_cast<std::size_t>(N) + 1, -1);
  remap[0] = 0;
  for (int a = 1; a <= N; ++a) {
    if (binding.value_of(vn::u(a)) == 0) continue;
    adder_node n;
    n.index = static_cast<int>(g.adders.size()) + 1;
    int left = -1, right = -1;
    for (int k = 0; k < a; ++k) {
      if (binding.value_of(vn::csel(a, 'l', k)) == 1) left = k;
      if (binding.value_of(vn::csel(a, 'r', k)) == 1) right = k;
    }
    if (left < 0 || right < 0) drift("adder " + std::to_string(a) + " without input selection");
    if (remap[static_cast<std::size_t>(left)] < 0 || remap[static_cast<std::size_t>(right)] < 0)
      drift("adder " + std::to_string(a) + " selects a deactivated adder");
    n.left = remap[static_cast<std::size_t>(left)];
    n.right = remap[static_cast<std::size_t>(right)];
    for (int s = 0; s <= ni.s_max; ++s)
      if (binding.value_of(vn::sigma(a, s)) == 1) n.left_shift = s;
    for (int k = 0; k <= -ni.s_min; ++k)
      if (binding.value_of(vn::psi_neg(a, k)) == 1) n.neg_shift = k;
    n.sign_left = binding.value_of(vn::phi(a, 'l')) == 1 ? sign_bit::minus : sign_bit::plus;
    n.sign_right = binding.value_of(vn::phi(a, 'r')) == 1 ? sign_bit::minus : sign_bit::plus;
    if (bundle.flavor == metric::truncated) {
      n.trunc_left = static_cast<int>(binding.value_of(vn::t(a, 'l')));
      n.trunc_right = static_cast<int>(binding.value_of(vn::t(a, 'r')));
    }
    n.fundamental = binding.value_of(vn::c(a));
    remap[static_cast<std::size_t>(a)] = n.index;
    g.adders.push_back(n);
  }

  for (const odd_normalized& t : ni.target_map) {
    std::size_t j = 0;
    while (ni.odd_targets[j] != t.odd) j++;
    int where = -1;
    if (ni.odd_targets[j] == 1 && binding.has(vn::out(0, j)) &&
        binding.value_of(vn::out(0, j)) == 1)
      where = 0;
    for (int a = 1; a <= N && where < 0; ++a)
      if (binding.value_of(vn::out(a, j)) == 1) where = a;
    if (where < 0 || remap[static_cast<std::size_t>(where)] < 0)
      drift("target " + std::to_string(t.original) + " is not assigned to a live adder");
    g.outputs.push_back({t.original, remap[static_cast<std::size_t>(where)], t.shift, t.negated});
  }

  validation_report rep = validate(g);
  if (!rep.ok) drift("decoded graph fails validation:\n" + rep.to_string());

  // re-verify every metric the binding claims, in exact arithmetic
  if (bundle.flavor != metric::adders) {
    depth_info d = adder_depth(g);
    for (int a = 1; a <= N; ++a) {
      if (remap[static_cast<std::size_t>(a)] < 0) continue;
      expect_eq(binding.value_of(vn::ad(a)),
                d.depth[static_cast<std::size_t>(remap[static_cast<std::size_t>(a)])],
                "adder depth of adder " + std::to_string(a));
    }
  }
  if (bundle.flavor == metric::bits || bundle.flavor == metric::truncated) {
    metrics_result mr = count_onebit_analytic(g);
    std::vector<error_interval> eps = propagate_error(g);
    for (int a = 1; a <= N; ++a) {
      int node = remap[static_cast<std::size_t>(a)];
      if (node < 0) continue;
      const node_metrics& nm = mr.per_node[static_cast<std::size_t>(node)];
      expect_eq(binding.value_of(vn::msb(a)), nm.msb, "msb of adder " + std::to_string(a));
      expect_eq(binding.value_of(vn::gain(a)), nm.gain, "gain of adder " + std::to_string(a));
      expect_eq(binding.value_of(vn::psi(a)), nm.carry_msb, "psi of adder " + std::to_string(a));
      expect_eq(binding.value_of(vn::cost(a)), nm.onebit_cost,
                "one-bit cost of adder " + std::to_string(a));
      if (bundle.flavor == metric::truncated) {
        expect_eq(binding.value_of(vn::z(a)), nm.trailing_zeros,
                  "trailing zeros of adder " + std::to_string(a));
        expect_eq(binding.value_of(vn::eps_inf(a)),
                  eps[static_cast<std::size_t>(node)].eps_inf,
                  "eps_inf of adder " + std::to_string(a));
        expect_eq(binding.value_of(vn::eps_sup(a)),
                  eps[static_cast<std::size_t>(node)].eps_sup,
                  "eps_sup of adder " + std::to_string(a));
      }
    }
  }
  return g;
}

}  // namespace mcm::models
