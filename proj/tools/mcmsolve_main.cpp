// standalone exact MILP solver for the LP files this project emits; speaks
// the same file protocol as any external solver profile
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mcmopt/bnb.hpp"
#include "mcmopt/lp_parse.hpp"

using namespace mcm;

int main(int argc, char** argv) {
  CLI::App app{"mcmsolve - exact branch-and-bound solver for small MILP models"};
  std::string lp_path, out_path = "solution.sol", start_path;
  double timeout = 1800;
  app.add_option("lp", lp_path, "LP model file")->required();
  app.add_option("--out", out_path, "solution file to write");
  app.add_option("--mip-start", start_path, "warm-start assignment (name value lines)");
  app.add_option("--timeout", timeout, "time limit in seconds");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(lp_path);
    if (!in) {
      std::cerr << "cannot open " << lp_path << "\n";
      return 4;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    milp::model m = milp::parse_lp(buf.str());

    bnb::options opt;
    opt.timeout_seconds = timeout;
    if (!start_path.empty()) {
      std::ifstream ms(start_path);
      if (!ms) {
        std::cerr << "cannot open " << start_path << "\n";
        return 4;
      }
      std::stringstream mbuf;
      mbuf << ms.rdbuf();
      milp::solution_binding warm = milp::parse_assignment(mbuf.str());
      milp::check_result chk = milp::check_binding(m, warm);
      if (chk.ok) {
        opt.warm_start = warm;
      } else {
        std::cerr << "warm start ignored: " << chk.first_violation << "\n";
      }
    }

    bnb::result res = bnb::solve(m, opt);
    std::cerr << res.log << "\n";

    std::ostringstream sol;
    switch (res.binding.st) {
      case milp::solution_binding::status::optimal:
        sol << "# status optimal\n";
        break;
      case milp::solution_binding::status::feasible_timeout:
        sol << "# status feasible\n";
        break;
      case milp::solution_binding::status::infeasible:
        sol << "# status infeasible\n";
        break;
      default:
        std::cerr << "no incumbent within the limits\n";
        return 3;
    }
    if (res.binding.st != milp::solution_binding::status::infeasible) {
      sol << "# objective " << res.binding.objective_value << "\n";
      for (const auto& [name, value] : res.binding.values) sol << name << " " << value << "\n";
    }
    std::ofstream out(out_path);
    out << sol.str();
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 4;
    }
    return res.binding.st == milp::solution_binding::status::infeasible ? 2 : 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 4;
  }
}
