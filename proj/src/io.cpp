#include "mcmopt/io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace mcm::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

i64 parse_int(const std::string& s, int lineno, const std::string& key) {
  std::size_t used = 0;
  i64 v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw error("instance parse",
                "line " + std::to_string(lineno) + ": malformed integer for " + key);
  }
  if (used != s.size())
    throw error("instance parse",
                "line " + std::to_string(lineno) + ": malformed integer for " + key);
  return v;
}

std::vector<i64> parse_int_list(const std::string& s, int lineno, const std::string& key) {
  std::vector<i64> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (cur.empty())
      throw error("instance parse", "line " + std::to_string(lineno) + ": empty entry in " + key);
    out.push_back(parse_int(cur, lineno, key));
  }
  if (out.empty())
    throw error("instance parse", "line " + std::to_string(lineno) + ": empty list for " + key);
  return out;
}

std::string join(const std::vector<i64>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

models::instance parse_instance(const std::string& text) {
  models::instance inst;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  bool have_targets = false;
  while (std::getline(is, line)) {
    lineno++;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw error("instance parse", "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (!seen.insert(key).second)
      throw error("instance parse", "line " + std::to_string(lineno) + ": duplicate key " + key);
    if (key == "targets") {
      inst.targets = parse_int_list(value, lineno, key);
      have_targets = true;
    } else if (key == "metric") {
      auto m = models::metric_from_string(value);
      if (!m)
        throw error("instance parse",
                    "line " + std::to_string(lineno) + ": unknown metric '" + value + "'");
      inst.objective = *m;
    } else if (key == "adder_bound") {
      inst.adder_bound = parse_int(value, lineno, key);
    } else if (key == "wordlength") {
      inst.wordlength = static_cast<int>(parse_int(value, lineno, key));
    } else if (key == "max_shift") {
      inst.max_shift = static_cast<int>(parse_int(value, lineno, key));
    } else if (key == "min_shift") {
      inst.min_shift = static_cast<int>(parse_int(value, lineno, key));
    } else if (key == "input_wordlength") {
      inst.input_wordlength = static_cast<int>(parse_int(value, lineno, key));
    } else if (key == "error_budgets") {
      inst.error_budgets = parse_int_list(value, lineno, key);
    } else if (key == "ad_bound") {
      inst.ad_bound = static_cast<int>(parse_int(value, lineno, key));
    } else if (key == "timeout") {
      inst.timeout_seconds = static_cast<double>(parse_int(value, lineno, key));
    } else if (key == "symmetry_breaking") {
      inst.symmetry_breaking = parse_int(value, lineno, key) != 0;
    } else if (key == "adder_bound_slack") {
      inst.adder_bound_slack = parse_int(value, lineno, key) != 0;
    } else if (key == "linearization") {
      if (value == "bigM")
        inst.lin_mode = milp::linearize::big_m;
      else if (value == "native")
        inst.lin_mode = milp::linearize::native;
      else
        throw error("instance parse",
                    "line " + std::to_string(lineno) + ": linearization must be bigM or native");
    } else {
      throw error("instance parse",
                  "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!have_targets) throw error("instance parse", "missing required key 'targets'");
  if (inst.objective == models::metric::truncated && inst.error_budgets.empty())
    throw error("instance parse", "metric tmcm requires key 'error_budgets'");
  if ((inst.objective == models::metric::bits || inst.objective == models::metric::truncated) &&
      !inst.input_wordlength)
    throw error("instance parse", "metric " + models::to_string(inst.objective) +
                                      " requires key 'input_wordlength'");
  return inst;
}

std::string emit_instance(const models::instance& inst) {
  std::ostringstream os;
  os << "targets = " << join(inst.targets) << "\n";
  os << "metric = " << models::to_string(inst.objective) << "\n";
  if (inst.adder_bound) os << "adder_bound = " << *inst.adder_bound << "\n";
  if (inst.wordlength) os << "wordlength = " << *inst.wordlength << "\n";
  if (inst.max_shift) os << "max_shift = " << *inst.max_shift << "\n";
  if (inst.min_shift) os << "min_shift = " << *inst.min_shift << "\n";
  if (inst.input_wordlength) os << "input_wordlength = " << *inst.input_wordlength << "\n";
  if (!inst.error_budgets.empty()) os << "error_budgets = " << join(inst.error_budgets) << "\n";
  if (inst.ad_bound) os << "ad_bound = " << *inst.ad_bound << "\n";
  os << "timeout = " << static_cast<i64>(inst.timeout_seconds) << "\n";
  os << "symmetry_breaking = " << (inst.symmetry_breaking ? 1 : 0) << "\n";
  if (inst.adder_bound_slack) os << "adder_bound_slack = 1\n";
  os << "linearization = " << (inst.lin_mode == milp::linearize::big_m ? "bigM" : "native")
     << "\n";
  return os.str();
}

namespace {

char sign_char(sign_bit s) { return s == sign_bit::minus ? '-' : '+'; }

sign_bit sign_from(const std::string& s, int lineno) {
  if (s == "+") return sign_bit::plus;
  if (s == "-") return sign_bit::minus;
  throw error("exchange parse", "line " + std::to_string(lineno) + ": sign must be + or -");
}

}  // namespace

std::string to_dot(const adder_graph& g) {
  std::ostringstream os;
  os << "digraph adder_graph {\n";
  os << "  rankdir=TB;\n";
  os << "  n0 [shape=circle, label=\"x\"];\n";
  for (const adder_node& n : g.adders) {
    os << "  n" << n.index << " [shape=box, label=\"" << n.fundamental;
    if (n.neg_shift > 0) os << " (>>" << n.neg_shift << ")";
    os << "\"];\n";
  }
  for (const adder_node& n : g.adders) {
    os << "  n" << n.left << " -> n" << n.index << " [label=\"" << sign_char(n.sign_left);
    if (n.left_shift > 0) os << "<<" << n.left_shift;
    if (n.trunc_left > 0) os << " t=" << n.trunc_left;
    os << "\"];\n";
    os << "  n" << n.right << " -> n" << n.index << " [label=\"" << sign_char(n.sign_right);
    if (n.trunc_right > 0) os << " t=" << n.trunc_right;
    os << "\"];\n";
  }
  for (std::size_t j = 0; j < g.outputs.size(); ++j) {
    const graph_output& o = g.outputs[j];
    os << "  out" << j << " [shape=plaintext, label=\"" << o.target << "x\"];\n";
    os << "  n" << o.node << " -> out" << j << " [style=dashed, label=\"";
    if (o.post_negate) os << "-";
    if (o.post_shift > 0) os << "<<" << o.post_shift;
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_exchange(const adder_graph& g) {
  depth_info d = adder_depth(g);
  std::ostringstream os;
  os << "G(" << g.input_wordlength << "; " << g.input_max << ") ";
  for (const adder_node& n : g.adders) {
    os << "A(" << n.fundamental << "; " << g.fundamental_of(n.left) << "," << n.left_shift << ","
       << sign_char(n.sign_left) << "; " << g.fundamental_of(n.right) << ",0,"
       << sign_char(n.sign_right) << "; " << n.neg_shift << "; " << n.trunc_left << ","
       << n.trunc_right << "; " << d.depth[static_cast<std::size_t>(n.index)] << ") ";
  }
  for (const graph_output& o : g.outputs)
    os << "O(" << o.target << "; " << g.fundamental_of(o.node) << "; " << o.post_shift << "; "
       << (o.post_negate ? 1 : 0) << ") ";
  std::string s = os.str();
  s.pop_back();
  s += "\n";
  return s;
}

namespace {

struct exchange_parser {
  std::string text;
  std::size_t pos = 0;
  int lineno = 1;

  [[noreturn]] void fail(const std::string& what) {
    throw error("exchange parse",
                "line " + std::to_string(lineno) + " column " + std::to_string(pos + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r')) {
      if (text[pos] == '\n') lineno++;
      pos++;
    }
  }

  bool done() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() { return pos < text.size() ? text[pos] : '\0'; }

  void expect(char c) {
    skip_ws();
    if (pos >= text.size() || text[pos] != c)
      fail(std::string("expected '") + c + "'");
    pos++;
  }

  std::string token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::string("();,").find(text[pos]) == std::string::npos &&
           !std::isspace(static_cast<unsigned char>(text[pos])))
      pos++;
    if (pos == start) fail("expected a token");
    return text.substr(start, pos - start);
  }

  i64 number() {
    std::string t = token();
    std::size_t i = t[0] == '-' ? 1 : 0;
    if (i == t.size()) fail("malformed integer '" + t + "'");
    for (std::size_t k = i; k < t.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(t[k]))) fail("malformed integer '" + t + "'");
    if (t.size() - i > 18) fail("integer out of range '" + t + "'");
    return std::stoll(t);
  }
};

}  // namespace

adder_graph from_exchange(const std::string& text) {
  exchange_parser p{text};
  adder_graph g;
  std::map<i64, int> node_of{{1, 0}};
  std::vector<int> stages;
  bool have_header = false;

  while (!p.done()) {
    std::string kind = p.token();
    p.expect('(');
    if (kind == "G") {
      if (have_header) p.fail("duplicate G header");
      have_header = true;
      g.input_wordlength = static_cast<int>(p.number());
      p.expect(';');
      g.input_max = p.number();
      p.expect(')');
      if (g.input_wordlength < 1 || g.input_max < 1) p.fail("invalid input header");
      continue;
    }
    if (kind == "A") {
      if (!have_header) p.fail("A record before the G header");
      adder_node n;
      n.index = static_cast<int>(g.adders.size()) + 1;
      n.fundamental = p.number();
      p.expect(';');
      i64 left_f = p.number();
      p.expect(',');
      n.left_shift = static_cast<int>(p.number());
      p.expect(',');
      n.sign_left = sign_from(p.token(), p.lineno);
      p.expect(';');
      i64 right_f = p.number();
      p.expect(',');
      i64 right_shift = p.number();
      p.expect(',');
      n.sign_right = sign_from(p.token(), p.lineno);
      p.expect(';');
      n.neg_shift = static_cast<int>(p.number());
      p.expect(';');
      n.trunc_left = static_cast<int>(p.number());
      p.expect(',');
      n.trunc_right = static_cast<int>(p.number());
      p.expect(';');
      stages.push_back(static_cast<int>(p.number()));
      p.expect(')');
      if (right_shift != 0) p.fail("right operand shifts are not representable");
      auto lit = node_of.find(left_f);
      auto rit = node_of.find(right_f);
      if (lit == node_of.end()) p.fail("left operand " + std::to_string(left_f) + " not defined yet");
      if (rit == node_of.end())
        p.fail("right operand " + std::to_string(right_f) + " not defined yet");
      n.left = lit->second;
      n.right = rit->second;
      if (n.left_shift < 0 || n.neg_shift < 0 || n.trunc_left < 0 || n.trunc_right < 0)
        p.fail("negative field");
      g.adders.push_back(n);
      node_of[n.fundamental] = n.index;  // duplicates bind to the latest definition
      continue;
    }
    if (kind == "O") {
      if (!have_header) p.fail("O record before the G header");
      graph_output o;
      o.target = p.number();
      p.expect(';');
      i64 f = p.number();
      p.expect(';');
      o.post_shift = static_cast<int>(p.number());
      p.expect(';');
      o.post_negate = p.number() != 0;
      p.expect(')');
      auto it = node_of.find(f);
      if (it == node_of.end()) p.fail("output fundamental " + std::to_string(f) + " not defined");
      o.node = it->second;
      g.outputs.push_back(o);
      continue;
    }
    p.fail("unknown record '" + kind + "'");
  }
  if (!have_header) throw error("exchange parse", "empty document");

  validation_report rep = validate(g);
  if (!rep.ok) throw error("exchange parse", "graph fails validation:\n" + rep.to_string());
  depth_info d = adder_depth(g);
  for (const adder_node& n : g.adders)
    if (d.depth[static_cast<std::size_t>(n.index)] != stages[static_cast<std::size_t>(n.index) - 1])
      throw error("exchange parse", "stage mismatch at node " + std::to_string(n.index) +
                                        ": stored " +
                                        std::to_string(stages[static_cast<std::size_t>(n.index) - 1]) +
                                        ", recomputed " +
                                        std::to_string(d.depth[static_cast<std::size_t>(n.index)]));
  return g;
}

}  // namespace mcm::io
