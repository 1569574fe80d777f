// cflow: command-line front end for the curvature-flow laboratory. Talks to
// the library exclusively through the C interface, so it doubles as a worked
// example of driving the shared library from a foreign language.
//
// Exit codes: 0 success (including runs halted by a reported event),
// 1 usage or input errors, 2 a requested analysis needs a hypothesis that
// fails, 3 numeric breakdown (outputs written up to the failure are kept).

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curvflow/capi.h"
#include "json.hpp"

namespace {

[[noreturn]] void die(cf_status_t st) {
  std::fprintf(stderr, "error: %s: %s\n", cf_status_string(st), cf_last_error());
  std::exit(st == CF_HYPOTHESIS ? 2 : st == CF_NUMERIC ? 3 : 1);
}

void check(cf_status_t st) {
  if (st != CF_SUCCESS) die(st);
}

// Handles with automatic release.
using Speed = std::unique_ptr<cf_speed_t, decltype(&cf_speed_destroy)>;
using Profile = std::unique_ptr<cf_profile_t, decltype(&cf_profile_destroy)>;
using Trajectory = std::unique_ptr<cf_trajectory_t, decltype(&cf_trajectory_destroy)>;

Speed parse_speed(const std::string& text, int n, double alpha) {
  cf_speed_t* raw = nullptr;
  check(cf_speed_parse(text.c_str(), n, alpha, &raw));
  return Speed(raw, &cf_speed_destroy);
}

Profile create_profile(const std::string& init, int n, double alpha, int grid) {
  cf_profile_t* raw = nullptr;
  check(cf_profile_create(init.c_str(), n, alpha, grid, &raw));
  return Profile(raw, &cf_profile_destroy);
}

Trajectory run_evolve(const Profile& p, const Speed& s, double t_end, int steps,
                      bool extend) {
  cf_trajectory_t* raw = nullptr;
  check(cf_evolve(p.get(), s.get(), t_end, steps, extend ? 1 : 0, &raw));
  return Trajectory(raw, &cf_trajectory_destroy);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  cf_free_string(s);
  return out;
}

// Shortest round-trip decimal form, so config lines are canonical.
std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    std::exit(1);
  }
  std::printf("wrote %s\n", path.c_str());
}

// JSON reports carry the reproducing command as a leading "config" member.
std::string with_config(const std::string& json_text, const std::string& config) {
  auto parsed = nlohmann::ordered_json::parse(json_text);
  nlohmann::ordered_json out;
  out["config"] = config;
  for (auto& [key, value] : parsed.items()) out[key] = std::move(value);
  return out.dump(2) + "\n";
}

void emit_json(const std::string& out_prefix, const std::string& text) {
  if (out_prefix.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_file(out_prefix + ".json", text);
}

// Prints the first occurrence of each event kind; returns true if the
// trajectory ends in a time-step collapse (numeric breakdown).
bool report_events(const Trajectory& traj) {
  bool collapsed = false;
  for (const char* kind : {"r1_negative", "domain_exit", "extinction", "step_collapse"}) {
    double t = 0.0;
    cf_status_t st = cf_trajectory_event(traj.get(), kind, &t);
    if (st == CF_HYPOTHESIS) continue;  // no such event
    check(st);
    std::printf("event %s at t = %s\n", kind, num(t).c_str());
    if (std::string(kind) == "step_collapse") collapsed = true;
  }
  return collapsed;
}

struct FlowArgs {
  std::string speed, init, extend = "continue", out;
  int n = 2, grid = 129, steps = 16;
  double alpha = 1.0, tend = 0.1;
};

std::string flow_config(const std::string& command, const FlowArgs& a) {
  return command + " --speed " + a.speed + " --n " + std::to_string(a.n) +
         " --alpha " + num(a.alpha) + " --init " + a.init + " --grid " +
         std::to_string(a.grid) + " --tend " + num(a.tend) + " --steps " +
         std::to_string(a.steps) + " --extend " + a.extend;
}

// Evolves and writes the standard bundle: trajectory, diagnostics, final
// embedding, bound report. Returns the process exit code.
int run_flow_bundle(const std::string& command, const FlowArgs& a,
                    bool initial_embedding) {
  const std::string config = flow_config(command, a);
  std::printf("%s\n", config.c_str());

  Speed speed = parse_speed(a.speed, a.n, a.alpha);
  Profile initial = create_profile(a.init, a.n, a.alpha, a.grid);
  Trajectory traj =
      run_evolve(initial, speed, a.tend, a.steps, a.extend == "continue");

  char* text = nullptr;
  check(cf_trajectory_csv(traj.get(), config.c_str(), &text));
  write_file(a.out + "_trajectory.csv", take(text));
  check(cf_diagnostics_csv(traj.get(), config.c_str(), &text));
  write_file(a.out + "_diagnostics.csv", take(text));

  if (initial_embedding) {
    check(cf_embedding_csv(initial.get(), config.c_str(), &text));
    write_file(a.out + "_initial_embedding.csv", take(text));
  }

  int stored = 0;
  check(cf_trajectory_steps(traj.get(), &stored));
  double t_last = 0.0;
  check(cf_trajectory_time(traj.get(), stored - 1, &t_last));
  std::printf("stored %d profiles, final time %s\n", stored, num(t_last).c_str());

  cf_profile_t* final_raw = nullptr;
  check(cf_trajectory_profile(traj.get(), stored - 1, &final_raw));
  Profile final(final_raw, &cf_profile_destroy);
  cf_status_t st = cf_embedding_csv(final.get(), config.c_str(), &text);
  if (st == CF_SUCCESS) {
    write_file(a.out + (initial_embedding ? "_final_embedding.csv" : "_embedding.csv"),
               take(text));
  } else if (st == CF_HYPOTHESIS) {
    std::printf("embedding skipped: %s\n", cf_last_error());
  } else {
    die(st);
  }

  check(cf_verify(traj.get(), speed.get(), &text));
  write_file(a.out + "_verify.json", with_config(take(text), config));

  return report_events(traj) ? 3 : 0;
}

int cmd_classify(const std::string& speed_text, int n, double alpha, int samples,
                 unsigned long long seed, const std::string& out) {
  std::string config = "classify --speed " + speed_text + " --n " + std::to_string(n) +
                       " --alpha " + num(alpha) + " --samples " + std::to_string(samples) +
                       " --seed " + std::to_string(seed);
  Speed speed = parse_speed(speed_text, n, alpha);
  char* text = nullptr;
  check(cf_classify(speed.get(), samples, seed, &text));
  emit_json(out, with_config(take(text), config));
  return 0;
}

int cmd_figure(double alpha, int grid, int steps, const std::string& out) {
  // Two frozen presets showing loss of convexity from degenerate initial
  // data: a polar flat cap for alpha below one, an annular flat band for
  // alpha above one. The band dip is transient (edge diffusion fills it in),
  // so its horizon is short; embed the final profile while the meridian
  // radius is still negative on the band.
  FlowArgs a;
  a.speed = "quot(2,1)";
  a.n = 2;
  a.grid = grid;
  a.steps = steps;
  a.out = out;
  if (std::abs(alpha - 0.5) < 1e-12) {
    a.alpha = 0.5;
    a.init = "bump:0.62831853071795865,1.0";  // theta0 = pi/5
    a.tend = 0.02;
  } else if (std::abs(alpha - 2.0) < 1e-12) {
    a.alpha = 2.0;
    a.init = "band:0.7,1.1,1.0,1.0";
    a.tend = 4e-6;
  } else {
    std::fprintf(stderr, "error: figure presets exist for --alpha 0.5 and 2\n");
    return 1;
  }
  // The config line is the equivalent flow invocation, so it reproduces the
  // run verbatim.
  return run_flow_bundle("flow", a, /*initial_embedding=*/true);
}

int cmd_barrier(const std::string& kind, const std::string& speed_text, int n,
                double alpha, double p1, double p2, const std::string& out) {
  std::string api_kind;
  if (kind == "cylinder")
    api_kind = "cyl_sub";
  else if (kind == "flatside")
    api_kind = "flat_sub";
  else if (kind == "ridge")
    api_kind = "ridge_super";
  else if (kind == "graph")
    api_kind = "graph_super";
  std::string config = "barrier --kind " + kind + " --speed " + speed_text + " --n " +
                       std::to_string(n) + " --alpha " + num(alpha) + " --p1 " +
                       num(p1) + " --p2 " + num(p2);
  Speed speed = parse_speed(speed_text, n, alpha);
  char* text = nullptr;
  check(cf_barrier_csv(speed.get(), api_kind.c_str(), p1, p2, config.c_str(), &text));
  std::string csv = take(text);
  if (out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_file(out + ".csv", csv);
  return 0;
}

int cmd_verify(const FlowArgs& a) {
  const std::string config = flow_config("verify", a);
  Speed speed = parse_speed(a.speed, a.n, a.alpha);
  Profile initial = create_profile(a.init, a.n, a.alpha, a.grid);
  Trajectory traj =
      run_evolve(initial, speed, a.tend, a.steps, a.extend == "continue");
  char* text = nullptr;
  check(cf_verify(traj.get(), speed.get(), &text));
  emit_json(a.out, with_config(take(text), config));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature-contraction flow laboratory"};
  app.require_subcommand(1);

  // classify ----------------------------------------------------------------
  auto* classify = app.add_subcommand(
      "classify", "Structural report for a speed: concavity conditions, flat-side "
                  "motion, persistence of cylinders and ridges, closing shape");
  std::string cl_speed;
  int cl_n = 2, cl_samples = 1000;
  double cl_alpha = 1.0;
  unsigned long long cl_seed = 1;
  std::string cl_out;
  classify->add_option("--speed", cl_speed, "speed expression, e.g. E(2) or quot(2,1)")
      ->required();
  classify->add_option("--n", cl_n, "number of principal curvatures")->required();
  classify->add_option("--alpha", cl_alpha, "homogeneity exponent")->required();
  classify->add_option("--samples", cl_samples, "random rays per condition check");
  classify->add_option("--seed", cl_seed, "sampling seed");
  classify->add_option("--out", cl_out, "write PREFIX.json instead of stdout");

  // flow ---------------------------------------------------------------------
  auto* flow = app.add_subcommand(
      "flow", "Evolve an axisymmetric profile; writes trajectory, diagnostics, "
              "final embedding and a bound report");
  FlowArgs fa;
  fa.out = "flow";
  flow->add_option("--speed", fa.speed, "speed expression")->required();
  flow->add_option("--n", fa.n, "number of principal curvatures")->required();
  flow->add_option("--alpha", fa.alpha, "homogeneity exponent")->required();
  flow->add_option("--init", fa.init,
                   "initial profile: sphere:R | bump:theta0,h | band:t1,t2,h1,h2 | "
                   "fourier:c0,c1,.. | cylinder:R,u0,umax")
      ->required();
  flow->add_option("--grid", fa.grid, "grid points");
  flow->add_option("--tend", fa.tend, "time horizon");
  flow->add_option("--steps", fa.steps, "stored output steps");
  flow->add_option("--extend", fa.extend, "past loss of convexity: stop | continue")
      ->check(CLI::IsMember({"stop", "continue"}));
  flow->add_option("--out", fa.out, "output file prefix");

  // figure1 -------------------------------------------------------------------
  auto* figure = app.add_subcommand(
      "figure1", "Preset convexity-loss runs (--alpha 0.5: polar flat cap; "
                 "--alpha 2: annular flat band); writes embeddings before and after");
  double fg_alpha = 0.5;
  int fg_grid = 129, fg_steps = 8;
  std::string fg_out = "figure1";
  figure->add_option("--alpha", fg_alpha, "preset selector: 0.5 or 2")->required();
  figure->add_option("--grid", fg_grid, "grid points");
  figure->add_option("--steps", fg_steps, "stored output steps");
  figure->add_option("--out", fg_out, "output file prefix");

  // barrier -------------------------------------------------------------------
  auto* barrier = app.add_subcommand(
      "barrier", "Closed-form comparison profile with pointwise margins");
  std::string br_kind, br_speed, br_out;
  int br_n = 2;
  double br_alpha = 1.0, br_p1 = 1.0, br_p2 = 1.0;
  barrier->add_option("--kind", br_kind, "cylinder | flatside | ridge | graph")
      ->required()
      ->check(CLI::IsMember({"cylinder", "flatside", "ridge", "graph"}));
  barrier->add_option("--speed", br_speed, "speed expression")->required();
  barrier->add_option("--n", br_n, "number of principal curvatures")->required();
  barrier->add_option("--alpha", br_alpha, "homogeneity exponent")->required();
  barrier->add_option("--p1", br_p1, "first parameter (graph: r_plus; ridge: u0)");
  barrier->add_option("--p2", br_p2, "second parameter (graph: gradient bound v)");
  barrier->add_option("--out", br_out, "write PREFIX.csv instead of stdout");

  // verify ---------------------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "Evolve and audit the trajectory against the comparison bounds");
  FlowArgs va;
  verify->add_option("--speed", va.speed, "speed expression")->required();
  verify->add_option("--n", va.n, "number of principal curvatures")->required();
  verify->add_option("--alpha", va.alpha, "homogeneity exponent")->required();
  verify->add_option("--init", va.init, "initial profile")->required();
  verify->add_option("--grid", va.grid, "grid points");
  verify->add_option("--tend", va.tend, "time horizon");
  verify->add_option("--steps", va.steps, "stored output steps");
  verify->add_option("--extend", va.extend, "past loss of convexity: stop | continue")
      ->check(CLI::IsMember({"stop", "continue"}));
  verify->add_option("--out", va.out, "write PREFIX.json instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  if (classify->parsed())
    return cmd_classify(cl_speed, cl_n, cl_alpha, cl_samples, cl_seed, cl_out);
  if (flow->parsed()) return run_flow_bundle("flow", fa, /*initial_embedding=*/false);
  if (figure->parsed()) return cmd_figure(fg_alpha, fg_grid, fg_steps, fg_out);
  if (barrier->parsed())
    return cmd_barrier(br_kind, br_speed, br_n, br_alpha, br_p1, br_p2, br_out);
  if (verify->parsed()) return cmd_verify(va);
  return 1;
}
