#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvflow/capi.h"

namespace {

// Scoped owners so failing CHECKs cannot leak handles.
struct Speed {
  cf_speed_t* h = nullptr;
  ~Speed() { cf_speed_destroy(h); }
};
struct Profile {
  cf_profile_t* h = nullptr;
  ~Profile() { cf_profile_destroy(h); }
};
struct Traj {
  cf_trajectory_t* h = nullptr;
  ~Traj() { cf_trajectory_destroy(h); }
};

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  cf_free_string(s);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("status strings and thread-local error reporting") {
  CHECK(std::strcmp(cf_status_string(CF_SUCCESS), "success") == 0);
  CHECK(std::strcmp(cf_status_string(CF_BAD_ARG), "bad argument") == 0);
  CHECK(std::strcmp(cf_status_string(CF_PARSE_ERROR), "parse error") == 0);
  CHECK(std::strcmp(cf_status_string(CF_DOMAIN_ERROR), "domain error") == 0);
  CHECK(std::strcmp(cf_status_string(CF_HYPOTHESIS), "hypothesis not satisfied") == 0);
  CHECK(std::strcmp(cf_status_string(CF_NUMERIC), "numeric failure") == 0);
  CHECK(std::strcmp(cf_status_string(CF_INTERNAL), "internal error") == 0);

  cf_speed_t* s = nullptr;
  CHECK(cf_speed_parse("E(1", 2, 1.0, &s) == CF_PARSE_ERROR);
  CHECK(s == nullptr);
  CHECK(std::string(cf_last_error()).find("parse error") != std::string::npos);

  // k out of range for n is a structural failure, not a parse failure.
  CHECK(cf_speed_parse("E(5)", 2, 1.0, &s) == CF_HYPOTHESIS);

  CHECK(cf_speed_parse(nullptr, 2, 1.0, &s) == CF_BAD_ARG);
  CHECK(cf_speed_parse("E(1)", 2, 1.0, nullptr) == CF_BAD_ARG);
}

TEST_CASE("speed handles: value, dual, restriction") {
  Speed s;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &s.h) == CF_SUCCESS);

  const double kappa[2] = {3.0, 1.0};
  double v = 0.0;
  REQUIRE(cf_speed_value(s.h, kappa, 2, &v) == CF_SUCCESS);
  CHECK(v == 2.0);

  CHECK(cf_speed_value(s.h, kappa, 3, &v) == CF_BAD_ARG);
  CHECK(cf_speed_value(nullptr, kappa, 2, &v) == CF_BAD_ARG);
  CHECK(cf_speed_value(s.h, nullptr, 2, &v) == CF_BAD_ARG);

  // Dual of the arithmetic mean is the harmonic mean.
  Speed dual;
  REQUIRE(cf_speed_dual(s.h, &dual.h) == CF_SUCCESS);
  const double pt[2] = {2.0, 0.5};
  REQUIRE(cf_speed_value(dual.h, pt, 2, &v) == CF_SUCCESS);
  CHECK(v == doctest::Approx(0.8).epsilon(1e-14));

  // The 2-face of the n=3 mean keeps the parent normalization, so the face
  // value stays comparable with the full speed: (3 + 1 + 0) / 3.
  Speed mean3;
  REQUIRE(cf_speed_parse("E(1)", 3, 1.0, &mean3.h) == CF_SUCCESS);
  Speed face;
  REQUIRE(cf_speed_restrict(mean3.h, 2, &face.h) == CF_SUCCESS);
  REQUIRE(cf_speed_value(face.h, kappa, 2, &v) == CF_SUCCESS);
  CHECK(v == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

  cf_speed_t* out = nullptr;
  CHECK(cf_speed_restrict(mean3.h, 0, &out) != CF_SUCCESS);
  CHECK(cf_speed_restrict(mean3.h, 3, &out) != CF_SUCCESS);

  cf_speed_destroy(nullptr);  // tolerated
}

TEST_CASE("classification report: shape, verdicts, determinism") {
  Speed s;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &s.h) == CF_SUCCESS);

  char* raw = nullptr;
  REQUIRE(cf_classify(s.h, 200, 1ull, &raw) == CF_SUCCESS);
  const std::string doc = take(raw);
  auto j = nlohmann::json::parse(doc);
  CHECK(j["spec"] == "E(1)");
  CHECK(j["n"] == 2);
  CHECK(j["alpha"] == 1.0);
  CHECK(j.contains("conditions"));
  CHECK(j.contains("predictions"));
  CHECK(j.contains("certificates"));
  CHECK(j["conditions"]["concave"]["verdict"] == "holds");
  CHECK(j["conditions"]["inverse_concave"]["verdict"] == "holds");
  CHECK(j["predictions"]["flat_sides"].contains("moves"));
  CHECK(j["predictions"]["closing_shape"]["converges_to_round_point"] == true);

  char* again = nullptr;
  REQUIRE(cf_classify(s.h, 200, 1ull, &again) == CF_SUCCESS);
  CHECK(take(again) == doc);

  CHECK(cf_classify(s.h, 0, 1ull, &raw) == CF_BAD_ARG);
  CHECK(cf_classify(nullptr, 200, 1ull, &raw) == CF_BAD_ARG);
}

TEST_CASE("profiles: creation grammar and value access") {
  Profile sph;
  REQUIRE(cf_profile_create("sphere:1.0", 2, 1.0, 65, &sph.h) == CF_SUCCESS);
  int size = 0;
  REQUIRE(cf_profile_size(sph.h, &size) == CF_SUCCESS);
  CHECK(size == 65);
  std::vector<double> buf(static_cast<std::size_t>(size));
  REQUIRE(cf_profile_values(sph.h, buf.data(), size) == CF_SUCCESS);
  for (double v : buf) CHECK(v == 1.0);
  CHECK(cf_profile_values(sph.h, buf.data(), 10) == CF_BAD_ARG);

  Profile fou;
  REQUIRE(cf_profile_create("fourier:1.0,0.1", 2, 1.0, 65, &fou.h) == CF_SUCCESS);
  REQUIRE(cf_profile_values(fou.h, buf.data(), 65) == CF_SUCCESS);
  CHECK(buf[0] == doctest::Approx(1.1).epsilon(1e-15));

  Profile band;
  CHECK(cf_profile_create("band:0.7,1.1,1.0,1.0", 2, 2.0, 129, &band.h) ==
        CF_SUCCESS);
  Profile cyl;
  CHECK(cf_profile_create("cylinder:1.0,0.5,2.0", 2, 1.0, 65, &cyl.h) ==
        CF_SUCCESS);

  cf_profile_t* out = nullptr;
  CHECK(cf_profile_create("blob:1.0", 2, 1.0, 65, &out) == CF_BAD_ARG);
  CHECK(cf_profile_create("sphere:x", 2, 1.0, 65, &out) == CF_BAD_ARG);
  CHECK(cf_profile_create("sphere:1,2", 2, 1.0, 65, &out) == CF_BAD_ARG);
  CHECK(cf_profile_create(nullptr, 2, 1.0, 65, &out) == CF_BAD_ARG);
  // Non-convex cosine data is a builder hypothesis failure, not a bad call.
  CHECK(cf_profile_create("fourier:1.0,0.45", 2, 1.0, 65, &out) == CF_HYPOTHESIS);
}

TEST_CASE("evolution: shrinking sphere through the C surface") {
  Speed s;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &s.h) == CF_SUCCESS);
  Profile p;
  REQUIRE(cf_profile_create("sphere:1.0", 2, 1.0, 65, &p.h) == CF_SUCCESS);

  Traj t;
  REQUIRE(cf_evolve(p.h, s.h, 0.375, 4, 1, &t.h) == CF_SUCCESS);
  int steps = 0;
  REQUIRE(cf_trajectory_steps(t.h, &steps) == CF_SUCCESS);
  CHECK(steps == 5);

  double tv = 0.0;
  REQUIRE(cf_trajectory_time(t.h, 4, &tv) == CF_SUCCESS);
  CHECK(tv == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(cf_trajectory_time(t.h, 5, &tv) == CF_BAD_ARG);
  CHECK(cf_trajectory_time(t.h, -1, &tv) == CF_BAD_ARG);

  Profile fin;
  REQUIRE(cf_trajectory_profile(t.h, 4, &fin.h) == CF_SUCCESS);
  std::vector<double> buf(65);
  REQUIRE(cf_profile_values(fin.h, buf.data(), 65) == CF_SUCCESS);
  for (double v : buf) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));

  double te = 0.0;
  CHECK(cf_trajectory_event(t.h, "extinction", &te) == CF_HYPOTHESIS);
  CHECK(cf_trajectory_event(t.h, nullptr, &te) == CF_BAD_ARG);

  CHECK(cf_evolve(p.h, s.h, -1.0, 4, 1, &t.h) != CF_SUCCESS);
}

TEST_CASE("evolution: convexity loss of a moving flat side is reported") {
  Speed s;
  REQUIRE(cf_speed_parse("quot(2,1)", 2, 0.5, &s.h) == CF_SUCCESS);
  Profile p;
  REQUIRE(cf_profile_create("bump:0.62831853071795865,1.0", 2, 0.5, 129, &p.h) ==
          CF_SUCCESS);
  Traj t;
  REQUIRE(cf_evolve(p.h, s.h, 0.02, 4, 1, &t.h) == CF_SUCCESS);
  double te = -1.0;
  REQUIRE(cf_trajectory_event(t.h, "r1_negative", &te) == CF_SUCCESS);
  CHECK(te > 0.0);
  CHECK(te <= 0.02);
}

TEST_CASE("trajectory audit report as JSON") {
  Speed s;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &s.h) == CF_SUCCESS);
  Profile p;
  REQUIRE(cf_profile_create("sphere:1.0", 2, 1.0, 65, &p.h) == CF_SUCCESS);
  Traj t;
  REQUIRE(cf_evolve(p.h, s.h, 0.3, 8, 1, &t.h) == CF_SUCCESS);

  char* raw = nullptr;
  REQUIRE(cf_verify(t.h, s.h, &raw) == CF_SUCCESS);
  auto j = nlohmann::json::parse(take(raw));
  CHECK(j["all_passed"] == true);
  REQUIRE(j["checks"].is_array());
  REQUIRE(j["checks"].size() == 4);
  bool saw_lower_speed = false;
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("applicable"));
    CHECK(c.contains("passed"));
    CHECK(c.contains("worst"));
    if (c["name"] == "lower_speed") {
      saw_lower_speed = true;
      CHECK(c["applicable"] == true);
      CHECK(c["passed"] == true);
    }
  }
  CHECK(saw_lower_speed);

  CHECK(cf_verify(nullptr, s.h, &raw) == CF_BAD_ARG);
}

TEST_CASE("CSV serialisations embed the config line") {
  Speed s;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &s.h) == CF_SUCCESS);
  Profile p;
  REQUIRE(cf_profile_create("sphere:1.0", 2, 1.0, 65, &p.h) == CF_SUCCESS);
  Traj t;
  REQUIRE(cf_evolve(p.h, s.h, 0.1, 2, 1, &t.h) == CF_SUCCESS);

  char* raw = nullptr;
  REQUIRE(cf_trajectory_csv(t.h, "flow --speed E(1) --n 2 --alpha 1", &raw) ==
          CF_SUCCESS);
  const std::string csv = take(raw);
  auto ls = lines_of(csv);
  REQUIRE(ls.size() == 5);  // comment + column header + 3 stored rows
  CHECK(ls[0] == "# flow --speed E(1) --n 2 --alpha 1");
  CHECK(ls[1].rfind("t,theta_0,theta_1,", 0) == 0);
  CHECK(ls[2].rfind("0,1,1,", 0) == 0);

  REQUIRE(cf_diagnostics_csv(t.h, "cfg", &raw) == CF_SUCCESS);
  auto dl = lines_of(take(raw));
  REQUIRE(dl.size() >= 3);
  CHECK(dl[0] == "# cfg");
  CHECK(dl[1] == "t,min_r1,min_r2,max_S,min_S,s0,s90");

  REQUIRE(cf_embedding_csv(p.h, "cfg", &raw) == CF_SUCCESS);
  auto el = lines_of(take(raw));
  CHECK(el[1] == "theta,x,y");
  // Full 2*pi period of the 65-point quarter-chart: 4 * 64 + 1 samples.
  CHECK(el.size() == 2 + 257);

  // Embedding of a cylinder-chart profile has no closed planar curve.
  Profile cyl;
  REQUIRE(cf_profile_create("cylinder:1.0,0.5,2.0", 2, 1.0, 65, &cyl.h) ==
          CF_SUCCESS);
  CHECK(cf_embedding_csv(cyl.h, "cfg", &raw) == CF_HYPOTHESIS);
}

TEST_CASE("barrier profile CSV with certificate trailer") {
  Speed norm_a;
  REQUIRE(cf_speed_parse("named(norm_A)", 2, 1.0, &norm_a.h) == CF_SUCCESS);

  char* raw = nullptr;
  REQUIRE(cf_barrier_csv(norm_a.h, "cyl_sub", 0.0, 0.0, "barrier --kind cylinder",
                         &raw) == CF_SUCCESS);
  const std::string csv = take(raw);
  auto ls = lines_of(csv);
  REQUIRE(ls.size() > 10);
  CHECK(ls[0] == "# barrier --kind cylinder");
  CHECK(ls[1] == "x,value,margin");
  CHECK(ls[ls.size() - 2].rfind("# kind=cylindrical_subsolution", 0) == 0);
  CHECK(ls[ls.size() - 2].find("min_margin=") != std::string::npos);
  CHECK(ls[ls.size() - 2].find("rate=") != std::string::npos);
  CHECK(ls.back().rfind("# ", 0) == 0);  // builder note

  // Deterministic bytes for identical inputs.
  REQUIRE(cf_barrier_csv(norm_a.h, "cyl_sub", 0.0, 0.0, "barrier --kind cylinder",
                         &raw) == CF_SUCCESS);
  CHECK(take(raw) == csv);

  Speed mean;
  REQUIRE(cf_speed_parse("E(1)", 2, 2.0, &mean.h) == CF_SUCCESS);
  REQUIRE(cf_barrier_csv(mean.h, "flat_sub", 0.0, 0.0, "cfg", &raw) == CF_SUCCESS);
  CHECK(take(raw).find("# kind=flat_subsolution") != std::string::npos);

  Speed mean1;
  REQUIRE(cf_speed_parse("E(1)", 2, 1.0, &mean1.h) == CF_SUCCESS);
  REQUIRE(cf_barrier_csv(mean1.h, "graph_super", 1.0, 1.0, "cfg", &raw) ==
          CF_SUCCESS);
  CHECK(take(raw).find("# kind=graph_supersolution") != std::string::npos);

  Speed hm;
  REQUIRE(cf_speed_parse("pmean(-2)", 2, 1.0, &hm.h) == CF_SUCCESS);
  REQUIRE(cf_barrier_csv(hm.h, "ridge_super", 1.0, 0.0, "cfg", &raw) == CF_SUCCESS);
  CHECK(take(raw).find("# kind=ridge_supersolution") != std::string::npos);

  // The mean-curvature dual vanishes on the boundary: no ridge barrier.
  CHECK(cf_barrier_csv(mean1.h, "ridge_super", 1.0, 0.0, "cfg", &raw) ==
        CF_HYPOTHESIS);
  CHECK(cf_barrier_csv(norm_a.h, "no_such_kind", 0.0, 0.0, "cfg", &raw) ==
        CF_BAD_ARG);
}
