#include "mcmopt/lp_parse.hpp"

#include <cctype>
#include <sstream>
#include <unordered_map>

namespace mcm::milp {

namespace {

struct token {
  std::string text;
  int line = 0;
};

std::vector<token> tokenize(const std::string& text) {
  std::vector<token> toks;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '\n') {
      line++;
      i++;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      i++;
      continue;
    }
    if (ch == '\\') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') i++;
      continue;
    }
    if (ch == '<' || ch == '>') {
      std::string op(1, ch);
      if (i + 1 < text.size() && text[i + 1] == '=') {
        op += '=';
        i++;
      }
      toks.push_back({op, line});
      i++;
      continue;
    }
    if (ch == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      toks.push_back({"->", line});
      i += 2;
      continue;
    }
    if (ch == '+' || ch == '-' || ch == '=' || ch == ':') {
      toks.push_back({std::string(1, ch), line});
      i++;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) j++;
      toks.push_back({text.substr(i, j - i), line});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        j++;
      toks.push_back({text.substr(i, j - i), line});
      i = j;
      continue;
    }
    throw error("lp parse", "line " + std::to_string(line) + ": unexpected character '" +
                                std::string(1, ch) + "'");
  }
  return toks;
}

bool is_number(const std::string& s) {
  return !s.empty() && std::isdigit(static_cast<unsigned char>(s[0]));
}

bool is_name(const std::string& s) {
  return !s.empty() &&
         (std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_');
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

class parser {
public:
  explicit parser(const std::string& text) : toks_(tokenize(text)) {}

  model run() {
    expect_keyword("minimize");
    parse_objective();
    expect_keyword_pair("subject", "to");
    parse_constraints();
    finalize_kinds();
    return std::move(m_);
  }

private:
  std::vector<token> toks_;
  std::size_t pos_ = 0;
  model m_;
  std::unordered_map<std::string, var_id> seen_;
  std::vector<std::string> binaries_, generals_;
  std::unordered_map<std::string, std::pair<i64, i64>> bounds_;

  [[noreturn]] void fail(const std::string& what) {
    int line = pos_ < toks_.size() ? toks_[pos_].line : (toks_.empty() ? 0 : toks_.back().line);
    throw error("lp parse", "line " + std::to_string(line) + ": " + what);
  }

  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() { return toks_.at(pos_).text; }
  std::string next() { return toks_.at(pos_++).text; }

  bool peek_keyword(const std::string& kw) {
    return !done() && is_name(peek()) && lower(peek()) == kw;
  }

  void expect_keyword(const std::string& kw) {
    if (!peek_keyword(kw)) fail("expected '" + kw + "'");
    pos_++;
  }

  void expect_keyword_pair(const std::string& a, const std::string& b) {
    expect_keyword(a);
    expect_keyword(b);
  }

  var_id ensure_var(const std::string& name) {
    auto it = seen_.find(name);
    if (it != seen_.end()) return it->second;
    var_id id = m_.add_var(name, var_kind::integer, 0, 0);
    seen_[name] = id;
    return id;
  }

  // a run of [+|-] [coef] name terms; stops at a relation or section keyword
  lin_expr parse_expr() {
    lin_expr e;
    bool expect_term = true;
    while (!done()) {
      const std::string& t = peek();
      if (t == "<=" || t == ">=" || t == "=" || t == "->") break;
      i64 sign = 1;
      if (t == "+" || t == "-") {
        sign = t == "-" ? -1 : 1;
        pos_++;
      } else if (!expect_term) {
        break;  // next section or row name
      }
      i64 coef = 1;
      if (!done() && is_number(peek())) coef = std::stoll(next());
      if (done() || !is_name(peek())) fail("expected a variable name in expression");
      e.add(sign * coef, ensure_var(next()));
      expect_term = false;
    }
    return e;
  }

  void parse_objective() {
    if (is_name(peek()) && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") pos_ += 2;
    m_.objective = parse_expr();
  }

  relation parse_relation() {
    std::string r = next();
    if (r == "<=") return relation::le;
    if (r == ">=") return relation::ge;
    if (r == "=") return relation::eq;
    fail("expected a relation");
  }

  i64 parse_rhs() {
    i64 sign = 1;
    if (!done() && (peek() == "-" || peek() == "+")) sign = next() == "-" ? -1 : 1;
    if (done() || !is_number(peek())) fail("expected a constant right-hand side");
    return sign * std::stoll(next());
  }

  bool at_section_end() {
    return done() || peek_keyword("bounds") || peek_keyword("binaries") ||
           peek_keyword("binary") || peek_keyword("generals") || peek_keyword("general") ||
           peek_keyword("end");
  }

  void parse_constraints() {
    while (!at_section_end()) {
      std::string name = "row" + std::to_string(m_.constraints.size());
      if (is_name(peek()) && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") {
        name = next();
        pos_++;  // ':'
      }
      // indicator form: guard = v -> expr rel rhs
      if (is_name(peek()) && pos_ + 3 < toks_.size() && toks_[pos_ + 1].text == "=" &&
          is_number(toks_[pos_ + 2].text) && toks_[pos_ + 3].text == "->") {
        var_id guard = ensure_var(next());
        pos_++;  // '='
        int active = static_cast<int>(std::stoll(next()));
        pos_++;  // '->'
        lin_expr lhs = parse_expr();
        relation rel = parse_relation();
        i64 rhs = parse_rhs();
        m_.constraints.push_back({name, std::move(lhs), rel, rhs, indicator{guard, active}, false, std::nullopt});
        continue;
      }
      lin_expr lhs = parse_expr();
      relation rel = parse_relation();
      i64 rhs = parse_rhs();
      m_.constraints.push_back({name, std::move(lhs), rel, rhs, std::nullopt, false, std::nullopt});
    }
    while (!done()) {
      if (peek_keyword("bounds")) {
        pos_++;
        parse_bounds();
      } else if (peek_keyword("binaries") || peek_keyword("binary")) {
        pos_++;
        parse_name_list(binaries_);
      } else if (peek_keyword("generals") || peek_keyword("general")) {
        pos_++;
        parse_name_list(generals_);
      } else if (peek_keyword("end")) {
        pos_++;
        if (!done()) fail("content after End");
      } else {
        fail("unexpected token '" + peek() + "'");
      }
    }
  }

  void parse_bounds() {
    while (!at_section_end()) {
      i64 lo = parse_rhs();
      if (next() != "<=") fail("expected '<=' in bounds");
      if (!is_name(peek())) fail("expected a variable name in bounds");
      std::string name = next();
      if (next() != "<=") fail("expected '<=' in bounds");
      i64 hi = parse_rhs();
      ensure_var(name);
      bounds_[name] = {lo, hi};
    }
  }

  void parse_name_list(std::vector<std::string>& into) {
    while (!at_section_end() && is_name(peek()) &&
           !(pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":")) {
      ensure_var(peek());
      into.push_back(next());
    }
  }

  void finalize_kinds() {
    std::unordered_map<std::string, bool> bin;
    for (const std::string& b : binaries_) bin[b] = true;
    for (var& v : m_.vars) {
      if (bin.count(v.name)) {
        v.kind = var_kind::binary;
        v.lower = 0;
        v.upper = 1;
      } else {
        auto it = bounds_.find(v.name);
        if (it == bounds_.end())
          throw error("lp parse", "no bounds for integer variable " + v.name);
        v.lower = it->second.first;
        v.upper = it->second.second;
        if (v.lower > v.upper)
          throw error("lp parse", "crossed bounds for " + v.name);
      }
    }
  }
};

}  // namespace

model parse_lp(const std::string& text) { return parser(text).run(); }

solution_binding parse_assignment(const std::string& text) {
  solution_binding b;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    lineno++;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name) || name[0] == '#') continue;
    i64 value;
    if (!(ls >> value))
      throw error("assignment parse", "line " + std::to_string(lineno) + ": expected 'name value'");
    b.values[name] = value;
  }
  return b;
}

}  // namespace mcm::milp
