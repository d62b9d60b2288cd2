#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kklab/cli.hpp"

using namespace kklab;

TEST_CASE("region JSON carries the expected geometry and re-parses") {
  const auto j = cli::region_json(3, 0.25, std::nullopt);
  CHECK(j["s_hat_minus"].get<double>() == doctest::Approx(1.05218).epsilon(3e-5));
  CHECK(j["alpha_hat_plus"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["admissible_interval_empty"].get<bool>() == false);

  // round-trip: the emitted object re-parses into the producing type's fields
  const auto text = j.dump();
  const auto back = nlohmann::ordered_json::parse(text);
  RegionBounds rb;
  rb.alpha_hat_plus = back["alpha_hat_plus"].get<double>();
  rb.s_hat_minus = back["s_hat_minus"].get<double>();
  rb.s_hat_plus = back["s_hat_plus"].get<double>();
  rb.s_cap = back["s_cap"].get<double>();
  rb.admissible_interval_empty = back["admissible_interval_empty"].get<bool>();
  // independently inlined copies of the closed forms may differ in the last
  // ulp under FMA contraction; the round-trip itself is exact
  const RegionBounds want = region_bounds(3, 0.25);
  CHECK(rb.alpha_hat_plus == doctest::Approx(want.alpha_hat_plus).epsilon(1e-14));
  CHECK(rb.s_hat_minus == doctest::Approx(want.s_hat_minus).epsilon(1e-14));
  CHECK(rb.s_hat_plus == doctest::Approx(want.s_hat_plus).epsilon(1e-14));
}

TEST_CASE("constants JSON re-parses into a ConstantsTable") {
  const auto j = cli::constants_json({3, 1.25, 0.25});
  ConstantsTable t;
  t.eta = j["eta"].get<double>();
  t.big_c = j["big_c"].get<double>();
  t.f_heuristic = j["f_heuristic"].get<double>();
  t.c0 = j["c0"].get<double>();
  const ConstantsTable want = self_similar_table({3, 1.25, 0.25});
  CHECK(t.eta == want.eta);
  CHECK(t.big_c == want.big_c);
  CHECK(t.f_heuristic == want.f_heuristic);
  CHECK(t.c0 == want.c0);
  CHECK(j["admissibility"].get<std::string>() == "inside");
}

TEST_CASE("simulate config parsing: valid input") {
  const std::string text =
      "d = 3\n"
      "n_max = 2\n"
      "s = 1.25\n"
      "alpha = 0.25\n"
      "nu = 0\n"
      "dt = 1e-4\n"
      "t_final = 1e-3\n"
      "n_paths = 4\n"
      "seed = 9\n"
      "output_times = 0, 5e-4, 1e-3\n"
      "init = broadband 2.0\n";
  const SimConfig cfg = cli::parse_simulate_config(text);
  CHECK(cfg.params.d == 3);
  CHECK(cfg.params.s == 1.25);
  CHECK(cfg.lat.n_max == 2);
  CHECK(cfg.n_paths == 4);
  CHECK(cfg.seed == 9);
  CHECK(cfg.output_times.size() == 3);
  CHECK(cfg.init.kind == InitSpec::Kind::broadband);

  const SimConfig cfg2 = cli::parse_simulate_config(
      "d = 3\nn_max = 2\ns = 1.2\nalpha = 0.3\ndt = 1e-4\nt_final = 1e-3\n"
      "n_paths = 2\ninit = single_mode 1 0 0\n");
  CHECK(cfg2.init.kind == InitSpec::Kind::single_mode);
  CHECK(cfg2.init.k0[0] == 1);
}

TEST_CASE("simulate config parsing: errors carry lines and echo hypotheses") {
  // range error echoes the violated constraint
  try {
    cli::parse_simulate_config("d = 3\nn_max = 2\ns = 1.25\nalpha = 1.5\ndt = 1e-4\n"
                               "t_final = 1e-3\nn_paths = 2\n");
    FAIL("expected a range error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("0 < alpha < 1") != std::string::npos);
  }
  // unknown key named with line number
  try {
    cli::parse_simulate_config("d = 3\nwhoops = 1\n");
    FAIL("expected an unknown-key error");
  } catch (const domain_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("whoops") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::parse_simulate_config("d = \n"), domain_error);
  CHECK_THROWS_AS(cli::parse_simulate_config("s = 0.9 extra\n"), domain_error);
  // missing required key is named
  try {
    cli::parse_simulate_config("d = 3\nalpha = 0.25\ndt = 1e-4\nt_final = 1e-3\n");
    FAIL("expected a missing-key error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("'s'") != std::string::npos);
  }
}

TEST_CASE("verify-bound CSV is schema-stable, monotone, and byte-deterministic") {
  const std::vector<double> lambdas{2.0, 4.0, 8.0};
  const auto a = cli::verify_bound_csv({3, 1.25, 0.25}, lambdas, 0, 0);
  const auto b = cli::verify_bound_csv({3, 1.25, 0.25}, lambdas, 0, 0);
  CHECK(a == b);
  std::istringstream is(a);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# kklab v", 0) == 0);
  std::getline(is, line);
  CHECK(line == "lambda,i_tra,i_str,i_mix,h_form,err,eta_fit,slope_fit,rho_fit");
  double prev = 0.0;
  int rows = 0;
  while (std::getline(is, line)) {
    const double lam = std::stod(line.substr(0, line.find(',')));
    CHECK(lam > prev);
    prev = lam;
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("Monte Carlo verify-bound path is seed-deterministic") {
  const std::vector<double> lambdas{2.0};
  const auto a = cli::verify_bound_csv({3, 1.25, 0.25}, lambdas, 50000, 11);
  const auto b = cli::verify_bound_csv({3, 1.25, 0.25}, lambdas, 50000, 11);
  CHECK(a == b);
}

TEST_CASE("atomic write leaves no temp file and the exact content") {
  namespace fs = std::filesystem;
  const std::string path = "/tmp/kklab_test_artifact.json";
  atomic_write_file(path, "{\"x\": 1}\n");
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == "{\"x\": 1}\n");
  CHECK(!fs::exists(path + ".tmp"));
  fs::remove(path);
}

TEST_CASE("report emitters produce gnuplot-style columns") {
  const auto dat = cli::report_region_dat(3);
  std::istringstream is(dat);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("#", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("#", 0) == 0);
  int rows = 0;
  while (std::getline(is, line)) {
    double a, lo, hi, cap;
    CHECK(std::sscanf(line.c_str(), "%lf %lf %lf %lf", &a, &lo, &hi, &cap) == 4);
    CHECK(lo < hi);
    ++rows;
  }
  CHECK(rows > 50);
}

TEST_CASE("report bound emits the asymptote next to the measured form") {
  const auto dat = cli::report_bound_dat({3, 1.25, 0.25}, {4.0, 8.0});
  std::istringstream is(dat);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    double lam, mh, pred, err;
    REQUIRE(std::sscanf(line.c_str(), "%lf %lf %lf %lf", &lam, &mh, &pred, &err) == 4);
    CHECK(mh > 0.0);
    CHECK(pred > 0.0);
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("config errors map to exit code semantics") {
  CHECK_THROWS_AS(cli::region_json(1, 0.25, std::nullopt), domain_error);
  CHECK_THROWS_AS(cli::constants_json({3, 2.5, 0.25}), domain_error);
  CHECK_THROWS_AS(cli::verify_bound_csv({3, 0.6, 0.3}, {4.0}, 0, 0), domain_error);
  CHECK_THROWS_AS(cli::mellin_check_json("nope", {{"b", 1.0}}, Complex(1.0, 0.0)),
                  domain_error);
}
