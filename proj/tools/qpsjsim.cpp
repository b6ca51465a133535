#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "qpsj/qpsj.h"

int main(int argc, char** argv) {
  CLI::App app{"Circuit simulator for phase-slip and Josephson junction neuromorphic circuits"};
  app.set_version_flag("--version", std::string(qpsj_version()));
  app.require_subcommand(1);

  std::string out_dir;
  auto* sim = app.add_subcommand("sim", "Run a transient analysis on a netlist");
  std::string netlist;
  double tstep = 0.0, tstop = 0.0;
  bool plot = false;
  qpsj_solver_config solver;
  qpsj_solver_defaults(&solver);
  std::string method = "trap";
  sim->add_option("netlist", netlist, "Netlist file")->required();
  sim->add_option("--tstep", tstep, "Output step in ps (overrides .tran)");
  sim->add_option("--tstop", tstop, "Stop time in ps (overrides .tran)");
  sim->add_option("--out", out_dir, "Output directory (default $QPSJ_OUT_DIR or ./qpsj_out)");
  sim->add_option("--reltol", solver.reltol, "Newton relative tolerance")->capture_default_str();
  sim->add_option("--max-iter", solver.max_newton_iters, "Newton iteration limit")->capture_default_str();
  sim->add_option("--method", method, "Integration method")
      ->check(CLI::IsMember({"trap", "be"}))
      ->capture_default_str();
  sim->add_flag("--plot", plot, "Also write a gnuplot script");

  auto* fig = app.add_subcommand("figure", "Run a named scenario");
  std::string id;
  fig->add_option("id", id, std::string("One of: ") + qpsj_figure_ids())->required();
  fig->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Sweep one template parameter");
  std::string templ, param, values;
  int threads = 0;
  sweep->add_option("template", templ, "neuron | binary | multistate | damping")->required();
  sweep->add_option("param", param, "n | ic | ic_j2 | l")->required();
  sweep->add_option("values", values, "Comma list or start:stop:step (SI suffixes allowed)")
      ->required();
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
  if (*sim) {
    solver.method = method == "be" ? QPSJ_BACKWARD_EULER : QPSJ_TRAPEZOIDAL;
    return qpsj_cmd_sim(netlist.c_str(), tstep, tstop, out, &solver, plot ? 1 : 0);
  }
  if (*fig) return qpsj_cmd_figure(id.c_str(), out);
  return qpsj_cmd_sweep(templ.c_str(), param.c_str(), values.c_str(), out, threads);
}
