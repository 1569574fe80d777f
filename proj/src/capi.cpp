#include "curvflow/capi.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvflow/axisym.hpp"
#include "curvflow/barriers.hpp"
#include "curvflow/classifier.hpp"
#include "curvflow/speed.hpp"

struct cf_speed {
  curvflow::SpeedSpec spec;
};
struct cf_profile {
  curvflow::SupportProfile p;
};
struct cf_trajectory {
  curvflow::Trajectory t;
};

namespace {

using namespace curvflow;

thread_local std::string g_last_error;

cf_status_t fail(cf_status_t st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

cf_status_t bad_arg(const char* msg) { return fail(CF_BAD_ARG, msg); }

// Runs the body and maps the library's exception taxonomy onto status codes.
template <typename Fn>
cf_status_t guarded(Fn&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    return fail(CF_PARSE_ERROR, e.what());
  } catch (const DomainError& e) {
    return fail(CF_DOMAIN_ERROR, e.what());
  } catch (const HypothesisError& e) {
    return fail(CF_HYPOTHESIS, e.what());
  } catch (const NumericError& e) {
    return fail(CF_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(CF_INTERNAL, e.what());
  } catch (...) {
    return fail(CF_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cf_status_t emit(const std::string& text, char** out) {
  *out = dup_string(text);
  if (!*out) return fail(CF_INTERNAL, "allocation failed");
  return CF_SUCCESS;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_config(std::string& out, const char* config_line) {
  if (config_line && *config_line) {
    out += "# ";
    out += config_line;
    out += '\n';
  }
}

// init grammar: name ':' comma-separated reals. Returns false on malformed
// numbers or trailing garbage.
bool split_params(const std::string& text, std::string& name,
                  std::vector<double>& params) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0) return false;
  name = text.substr(0, colon);
  std::size_t start = colon + 1;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string tok = text.substr(start, comma - start);
    if (tok.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) return false;
    params.push_back(v);
    start = comma + 1;
  }
  return !params.empty();
}

}  // namespace

extern "C" {

const char* cf_status_string(cf_status_t status) {
  switch (status) {
    case CF_SUCCESS: return "success";
    case CF_BAD_ARG: return "bad argument";
    case CF_PARSE_ERROR: return "parse error";
    case CF_DOMAIN_ERROR: return "domain error";
    case CF_HYPOTHESIS: return "hypothesis not satisfied";
    case CF_NUMERIC: return "numeric failure";
    case CF_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cf_last_error(void) { return g_last_error.c_str(); }

void cf_free_string(char* s) { std::free(s); }

/* Speeds ------------------------------------------------------------------ */

cf_status_t cf_speed_parse(const char* text, int n, double alpha,
                           cf_speed_t** out) {
  if (!text || !out) return bad_arg("cf_speed_parse: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cf_speed{parse_speed(text, n, alpha)};
    return CF_SUCCESS;
  });
}

void cf_speed_destroy(cf_speed_t* speed) { delete speed; }

cf_status_t cf_speed_value(const cf_speed_t* speed, const double* kappa, int n,
                           double* out) {
  if (!speed || !kappa || !out) return bad_arg("cf_speed_value: null argument");
  if (n != speed->spec.n) return bad_arg("cf_speed_value: dimension mismatch");
  return guarded([&] {
    *out = value(speed->spec, Vec(kappa, kappa + n));
    return CF_SUCCESS;
  });
}

cf_status_t cf_speed_dual(const cf_speed_t* speed, cf_speed_t** out) {
  if (!speed || !out) return bad_arg("cf_speed_dual: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cf_speed{dualize(speed->spec)};
    return CF_SUCCESS;
  });
}

cf_status_t cf_speed_restrict(const cf_speed_t* speed, int m, cf_speed_t** out) {
  if (!speed || !out) return bad_arg("cf_speed_restrict: null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new cf_speed{restrict_boundary(speed->spec, m)};
    return CF_SUCCESS;
  });
}

cf_status_t cf_classify(const cf_speed_t* speed, int samples,
                        unsigned long long seed, char** json_out) {
  if (!speed || !json_out) return bad_arg("cf_classify: null argument");
  if (samples < 1) return bad_arg("cf_classify: samples must be positive");
  *json_out = nullptr;
  return guarded([&] {
    const auto j = classify(speed->spec, samples, seed);
    return emit(j.dump(2) + "\n", json_out);
  });
}

/* Profiles and flows ------------------------------------------------------ */

cf_status_t cf_profile_create(const char* init, int n, double alpha,
                              int grid_points, cf_profile_t** out) {
  if (!init || !out) return bad_arg("cf_profile_create: null argument");
  *out = nullptr;
  std::string name;
  std::vector<double> q;
  if (!split_params(init, name, q))
    return bad_arg("cf_profile_create: init must be name:v1,v2,..");
  return guarded([&]() -> cf_status_t {
    SupportProfile p;
    if (name == "sphere" && q.size() == 1) {
      p = make_sphere(n, grid_points, q[0]);
    } else if (name == "bump" && q.size() == 2) {
      p = make_flat_cap(n, grid_points, alpha, q[0], q[1]);
    } else if (name == "band" && q.size() == 4) {
      p = make_flat_band(n, grid_points, alpha, q[0], q[1], q[2], q[3]);
    } else if (name == "fourier") {
      p = make_fourier(n, grid_points, q);
    } else if (name == "cylinder" && q.size() == 3) {
      p = make_cylinder_cap(n, grid_points, q[0], q[1], q[2]);
    } else {
      return bad_arg(
          "cf_profile_create: expected sphere:R | bump:theta0,h | "
          "band:theta1,theta2,h1,h2 | fourier:c0,c1,.. | cylinder:R,u0,umax");
    }
    *out = new cf_profile{std::move(p)};
    return CF_SUCCESS;
  });
}

void cf_profile_destroy(cf_profile_t* profile) { delete profile; }

cf_status_t cf_profile_size(const cf_profile_t* profile, int* out) {
  if (!profile || !out) return bad_arg("cf_profile_size: null argument");
  *out = static_cast<int>(profile->p.values.size());
  return CF_SUCCESS;
}

cf_status_t cf_profile_values(const cf_profile_t* profile, double* buffer,
                              int capacity) {
  if (!profile || !buffer) return bad_arg("cf_profile_values: null argument");
  const int size = static_cast<int>(profile->p.values.size());
  if (capacity < size) return bad_arg("cf_profile_values: buffer too small");
  std::memcpy(buffer, profile->p.values.data(),
              static_cast<std::size_t>(size) * sizeof(double));
  return CF_SUCCESS;
}

cf_status_t cf_evolve(const cf_profile_t* initial, const cf_speed_t* speed,
                      double t_end, int stored_steps, int extend_past_convexity,
                      cf_trajectory_t** out) {
  if (!initial || !speed || !out) return bad_arg("cf_evolve: null argument");
  *out = nullptr;
  return guarded([&] {
    EvolveOptions opt;
    opt.t_end = t_end;
    opt.stored_steps = stored_steps;
    opt.extend_past_convexity = extend_past_convexity != 0;
    *out = new cf_trajectory{evolve(initial->p, speed->spec, opt)};
    return CF_SUCCESS;
  });
}

void cf_trajectory_destroy(cf_trajectory_t* traj) { delete traj; }

cf_status_t cf_trajectory_steps(const cf_trajectory_t* traj, int* out) {
  if (!traj || !out) return bad_arg("cf_trajectory_steps: null argument");
  *out = static_cast<int>(traj->t.profiles.size());
  return CF_SUCCESS;
}

cf_status_t cf_trajectory_time(const cf_trajectory_t* traj, int index,
                               double* out) {
  if (!traj || !out) return bad_arg("cf_trajectory_time: null argument");
  if (index < 0 || index >= static_cast<int>(traj->t.times.size()))
    return bad_arg("cf_trajectory_time: index out of range");
  *out = traj->t.times[static_cast<std::size_t>(index)];
  return CF_SUCCESS;
}

cf_status_t cf_trajectory_profile(const cf_trajectory_t* traj, int index,
                                  cf_profile_t** out) {
  if (!traj || !out) return bad_arg("cf_trajectory_profile: null argument");
  if (index < 0 || index >= static_cast<int>(traj->t.profiles.size()))
    return bad_arg("cf_trajectory_profile: index out of range");
  *out = new cf_profile{traj->t.profiles[static_cast<std::size_t>(index)]};
  return CF_SUCCESS;
}

cf_status_t cf_trajectory_event(const cf_trajectory_t* traj, const char* kind,
                                double* t_out) {
  if (!traj || !kind || !t_out) return bad_arg("cf_trajectory_event: null argument");
  const double t = traj->t.event_time(kind);
  if (std::isnan(t))
    return fail(CF_HYPOTHESIS,
                std::string("trajectory has no '") + kind + "' event");
  *t_out = t;
  return CF_SUCCESS;
}

cf_status_t cf_verify(const cf_trajectory_t* traj, const cf_speed_t* speed,
                      char** json_out) {
  if (!traj || !speed || !json_out) return bad_arg("cf_verify: null argument");
  *json_out = nullptr;
  return guarded([&] {
    const BoundReport rep = verify_trajectory(traj->t, speed->spec);
    nlohmann::ordered_json j;
    j["all_passed"] = rep.all_passed();
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const BoundCheck& c : rep.checks) {
      nlohmann::ordered_json e;
      e["name"] = c.name;
      e["applicable"] = c.applicable;
      e["passed"] = c.passed;
      e["worst"] = c.worst;
      e["note"] = c.note;
      checks.push_back(std::move(e));
    }
    j["checks"] = std::move(checks);
    return emit(j.dump(2) + "\n", json_out);
  });
}

/* CSV serialisations ------------------------------------------------------ */

cf_status_t cf_trajectory_csv(const cf_trajectory_t* traj,
                              const char* config_line, char** csv_out) {
  if (!traj || !csv_out) return bad_arg("cf_trajectory_csv: null argument");
  *csv_out = nullptr;
  return guarded([&]() -> cf_status_t {
    if (traj->t.profiles.empty())
      throw HypothesisError("trajectory has no stored profiles");
    std::string out;
    append_config(out, config_line);
    const char* label =
        traj->t.profiles.front().chart == Chart::Latitude ? "theta_" : "u_";
    out += 't';
    for (std::size_t j = 0; j < traj->t.profiles.front().grid.size(); ++j)
      out += "," + std::string(label) + std::to_string(j);
    out += '\n';
    for (std::size_t k = 0; k < traj->t.profiles.size(); ++k) {
      out += fmt17(traj->t.times[k]);
      for (double v : traj->t.profiles[k].values) out += ',' + fmt17(v);
      out += '\n';
    }
    return emit(out, csv_out);
  });
}

cf_status_t cf_diagnostics_csv(const cf_trajectory_t* traj,
                               const char* config_line, char** csv_out) {
  if (!traj || !csv_out) return bad_arg("cf_diagnostics_csv: null argument");
  *csv_out = nullptr;
  return guarded([&] {
    std::string out;
    append_config(out, config_line);
    out += "t,min_r1,min_r2,max_S,min_S,s0,s90\n";
    for (const Diagnostics& d : traj->t.diagnostics) {
      out += fmt17(d.t) + ',' + fmt17(d.min_r1) + ',' + fmt17(d.min_r2) + ',' +
             fmt17(d.max_S) + ',' + fmt17(d.min_S) + ',' + fmt17(d.s0) + ',' +
             fmt17(d.s90) + '\n';
    }
    return emit(out, csv_out);
  });
}

cf_status_t cf_embedding_csv(const cf_profile_t* profile, const char* config_line,
                             char** csv_out) {
  if (!profile || !csv_out) return bad_arg("cf_embedding_csv: null argument");
  *csv_out = nullptr;
  return guarded([&] {
    const PlanarCurve c = embed(profile->p);
    std::string out;
    append_config(out, config_line);
    out += "theta,x,y\n";
    for (std::size_t k = 0; k < c.theta.size(); ++k)
      out += fmt17(c.theta[k]) + ',' + fmt17(c.x[k]) + ',' + fmt17(c.y[k]) + '\n';
    return emit(out, csv_out);
  });
}

/* Barrier profiles --------------------------------------------------------- */

cf_status_t cf_barrier_csv(const cf_speed_t* speed, const char* kind, double p1,
                           double p2, const char* config_line, char** csv_out) {
  if (!speed || !kind || !csv_out) return bad_arg("cf_barrier_csv: null argument");
  *csv_out = nullptr;
  const std::string which = kind;
  return guarded([&]() -> cf_status_t {
    BarrierProfile prof;
    if (which == "flat_sub") {
      prof = build_flat_subsolution(speed->spec.alpha);
    } else if (which == "graph_super") {
      prof = build_graph_supersolution(speed->spec, p1, p2);
    } else if (which == "cyl_sub") {
      prof = build_cylindrical_subsolution(speed->spec, speed->spec.alpha);
    } else if (which == "ridge_super") {
      prof = build_ridge_supersolution(speed->spec, p1);
    } else {
      return bad_arg(
          "cf_barrier_csv: kind must be flat_sub | graph_super | cyl_sub | "
          "ridge_super");
    }
    std::string out;
    append_config(out, config_line);
    out += "x,value,margin\n";
    for (std::size_t j = 0; j < prof.x.size(); ++j)
      out += fmt17(prof.x[j]) + ',' + fmt17(prof.value[j]) + ',' +
             fmt17(prof.margin[j]) + '\n';
    out += "# kind=" + prof.kind + " min_margin=" + fmt17(prof.min_margin) +
           " rate=" + fmt17(prof.rate) + '\n';
    if (!prof.note.empty()) out += "# " + prof.note + '\n';
    return emit(out, csv_out);
  });
}

}  // extern "C"
