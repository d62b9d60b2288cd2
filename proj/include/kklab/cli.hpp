#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kklab/bound_check.hpp"
#include "kklab/constants_region.hpp"
#include "kklab/io_util.hpp"
#include "kklab/mellin.hpp"
#include "kklab/simulate.hpp"

namespace kklab {

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_nonconvergence = 1, exit_config_error = 2 };

namespace cli {

using json = nlohmann::ordered_json;

inline double parse_number(const std::string& text, const std::string& key) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw domain_error("invalid number for '" + key + "': " + text);
  }
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size())
    throw domain_error("trailing characters in number for '" + key + "': " + text);
  return v;
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    // allow whitespace-separated lists as well
    std::istringstream ws(item);
    std::string tok;
    while (ws >> tok) out.push_back(parse_number(tok, key));
  }
  if (out.empty()) throw domain_error("empty list for '" + key + "'");
  return out;
}

/// Range validation that echoes the hypothesis the value violates.
inline void check_model_ranges(int d, std::optional<double> s, std::optional<double> alpha) {
  if (d < 2) throw domain_error("d out of range: the model needs d >= 2");
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0))
    throw domain_error("alpha out of range: the admissibility hypothesis needs 0 < alpha < 1");
  if (s && !(*s > 0.0 && *s < 0.5 * d))
    throw domain_error("s out of range: Sobolev-norm objects need 0 < s < d/2");
}

inline json region_json(int d, double alpha, std::optional<double> s) {
  check_model_ranges(d, s, alpha);
  const RegionBounds rb =
      region_bounds(d, alpha, s ? *s : std::numeric_limits<double>::quiet_NaN());
  json j;
  j["d"] = d;
  j["alpha"] = alpha;
  j["alpha_hat_plus"] = rb.alpha_hat_plus;
  j["alpha_hat_minus"] = rb.alpha_hat_minus;
  j["s_hat_minus"] = rb.s_hat_minus;
  j["s_hat_plus"] = rb.s_hat_plus;
  j["s_cap"] = rb.s_cap;
  j["delta_s"] = rb.delta_s;
  j["alpha_root_minus"] = rb.alpha_roots_of_s.first;
  j["alpha_root_plus"] = rb.alpha_roots_of_s.second;
  j["delta_alpha"] = rb.delta_alpha;
  j["s_admissible_lo"] = rb.s_admissible_lo;
  j["s_admissible_hi"] = rb.s_admissible_hi;
  j["admissible_interval_empty"] = rb.admissible_interval_empty;
  return j;
}

inline json constants_json(const ModelParams& p) {
  check_model_ranges(p.d, p.s, p.alpha);
  const ConstantsTable t = self_similar_table(p);
  json j;
  j["d"] = p.d;
  j["s"] = p.s;
  j["alpha"] = p.alpha;
  j["eta"] = t.eta;
  j["big_c"] = t.big_c;
  j["c_tra"] = t.c_tra;
  j["c_str"] = t.c_str;
  j["c_mix"] = t.c_mix;
  j["f_heuristic"] = t.f_heuristic;
  j["pi1_tilde"] = t.pi1_tilde;
  j["pi2_tilde"] = t.pi2_tilde;
  j["c0"] = t.c0;
  j["beta_ratio"] = t.beta_ratio;
  j["gamma_ratio_long"] = t.gamma_ratio_long;
  j["gamma_ratio_norm"] = t.gamma_ratio_norm;
  switch (classify(p)) {
    case Admissibility::inside: j["admissibility"] = "inside"; break;
    case Admissibility::boundary: j["admissibility"] = "boundary"; break;
    case Admissibility::outside: j["admissibility"] = "outside"; break;
  }
  // merge the region geometry for the same (d, alpha, s)
  json r = region_json(p.d, p.alpha, p.s);
  for (auto& [k, v] : r.items())
    if (!j.contains(k)) j[k] = v;
  return j;
}

inline json mellin_check_json(const std::string& family,
                              const std::map<std::string, double>& params, Complex z) {
  MellinClosedForm m;
  if (family == "lorentzian") {
    m = MellinClosedForm::lorentzian(params.at("b"));
  } else if (family == "angular") {
    m = MellinClosedForm::angular(params.at("a"), params.at("b"), params.at("s"));
  } else {
    throw domain_error("unknown Mellin family: " + family);
  }
  const Complex closed = m.value(z);
  const auto numeric = numeric_mellin(m, z, 1e-9);
  json j;
  j["family"] = family;
  for (const auto& [k, v] : params) j[k] = v;
  j["z_re"] = z.real();
  j["z_im"] = z.imag();
  j["strip_lo"] = m.fundamental_strip().first;
  j["strip_hi"] = m.fundamental_strip().second;
  j["closed_re"] = closed.real();
  j["closed_im"] = closed.imag();
  j["numeric_re"] = numeric.value.real();
  j["numeric_im"] = numeric.value.imag();
  j["numeric_error"] = numeric.error_estimate;
  j["discrepancy"] = std::abs(closed - numeric.value);
  j["converged"] = numeric.converged;
  return j;
}

inline std::string verify_bound_csv(const ModelParams& p, const std::vector<double>& lambdas,
                                    std::size_t mc_samples, std::uint64_t seed) {
  check_model_ranges(p.d, p.s, p.alpha);
  if (!(p.s + p.alpha > 1.0))
    throw domain_error("s + alpha out of range: the symbol integrals need s + alpha > 1");
  const BoundVerification v = verify_bound(p, lambdas, mc_samples, seed);
  if (!v.converged)
    throw nonconvergence_error("verify-bound: a symbol integral failed to converge");
  std::ostringstream os;
  std::ostringstream meta;
  meta << "d=" << p.d << " s=" << format_double(p.s) << " alpha=" << format_double(p.alpha)
       << " mc_samples=" << mc_samples;
  os << provenance_line("verify-bound", meta.str(), seed) << "\n";
  os << "lambda,i_tra,i_str,i_mix,h_form,err,eta_fit,slope_fit,rho_fit\n";
  for (const auto& r : v.rows) {
    os << format_double(r.lambda) << ',' << format_double(r.tra.value) << ','
       << format_double(r.str.value) << ',' << format_double(r.mix.value) << ','
       << format_double(r.h.value) << ',' << format_double(r.h.error_estimate) << ','
       << format_double(r.eta_pointwise) << ',' << format_double(v.slope_fit) << ','
       << format_double(v.rho_fit) << "\n";
  }
  return os.str();
}

/// Parse the flat key = value simulate configuration.  Unknown keys are
/// rejected; range errors echo the violated hypothesis; messages carry line
/// numbers.
inline SimConfig parse_simulate_config(const std::string& text) {
  SimConfig cfg;
  int d = 3, n_max = 4;
  bool have_s = false, have_alpha = false;
  int line_no = 0;
  std::istringstream is(text);
  std::string line;
  auto fail = [&](const std::string& msg) {
    throw domain_error("config line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = t.find_last_not_of(" \t\r");
      return t.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    if (val.empty()) fail("missing value for '" + key + "'");
    try {
      if (key == "d") d = static_cast<int>(parse_number(val, key));
      else if (key == "n_max") n_max = static_cast<int>(parse_number(val, key));
      else if (key == "s") { cfg.params.s = parse_number(val, key); have_s = true; }
      else if (key == "alpha") { cfg.params.alpha = parse_number(val, key); have_alpha = true; }
      else if (key == "nu") cfg.nu = parse_number(val, key);
      else if (key == "dt") cfg.dt = parse_number(val, key);
      else if (key == "t_final") cfg.t_final = parse_number(val, key);
      else if (key == "n_paths") cfg.n_paths = static_cast<int>(parse_number(val, key));
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_number(val, key));
      else if (key == "output_times") cfg.output_times = parse_number_list(val, key);
      else if (key == "init") {
        std::istringstream vs(val);
        std::string kind;
        vs >> kind;
        if (kind == "single_mode") {
          cfg.init.kind = InitSpec::Kind::single_mode;
          if (!(vs >> cfg.init.k0[0] >> cfg.init.k0[1])) fail("single_mode needs k components");
          if (!(vs >> cfg.init.k0[2])) cfg.init.k0[2] = 0;
        } else if (kind == "broadband") {
          cfg.init.kind = InitSpec::Kind::broadband;
          if (!(vs >> cfg.init.gamma)) fail("broadband needs a spectral exponent");
        } else {
          fail("init must be 'single_mode kx ky kz' or 'broadband gamma'");
        }
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const domain_error&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!have_s) throw domain_error("missing required key 's'");
  if (!have_alpha) throw domain_error("missing required key 'alpha'");
  cfg.params.d = d;
  check_model_ranges(d, cfg.params.s, cfg.params.alpha);
  if (!(cfg.dt > 0.0)) throw domain_error("dt must be positive");
  if (!(cfg.t_final > 0.0)) throw domain_error("t_final must be positive");
  if (cfg.n_paths < 2) throw domain_error("n_paths must be at least 2");
  cfg.lat = Lattice(d, n_max);
  if (cfg.output_times.empty())
    cfg.output_times = {0.0, 0.5 * cfg.t_final, cfg.t_final};
  return cfg;
}

inline std::string simulate_csv(const SimConfig& cfg) {
  const NormSeries ns = run_ensemble(cfg);
  std::ostringstream meta;
  meta << "d=" << cfg.params.d << " n_max=" << cfg.lat.n_max << " s=" << format_double(cfg.params.s)
       << " alpha=" << format_double(cfg.params.alpha) << " nu=" << format_double(cfg.nu)
       << " dt=" << format_double(cfg.dt) << " t_final=" << format_double(cfg.t_final)
       << " n_paths=" << cfg.n_paths;
  std::ostringstream os;
  os << provenance_line("simulate", meta.str(), cfg.seed) << "\n";
  os << "t,mean_hs,stderr_hs,mean_gain,stderr_gain,mean_l2,stderr_l2\n";
  for (std::size_t i = 0; i < ns.times.size(); ++i) {
    os << format_double(ns.times[i]) << ',' << format_double(ns.mean_hs_norm_sq[i]) << ','
       << format_double(ns.stderr_hs[i]) << ',' << format_double(ns.mean_gain_norm_sq[i]) << ','
       << format_double(ns.stderr_gain[i]) << ',' << format_double(ns.mean_l2_sq[i]) << ','
       << format_double(ns.stderr_l2[i]) << "\n";
  }
  return os.str();
}

/// gnuplot-ready data files for the report subcommand
inline std::string report_region_dat(int d) {
  check_model_ranges(d, std::nullopt, std::nullopt);
  std::ostringstream os;
  os << provenance_line("report", "what=region d=" + std::to_string(d), 0) << "\n";
  os << "# alpha s_hat_minus s_hat_plus s_cap\n";
  const double a_hi = (d >= 3) ? std::min(1.0, region_bounds(d, 0.5 * 1e-6).alpha_hat_plus)
                               : 1.0;
  for (int i = 1; i < 200; ++i) {
    const double a = a_hi * i / 200.0;
    if (!(a > 0.0 && a < 1.0)) continue;
    const RegionBounds rb = region_bounds(d, a);
    if (rb.delta_s < 0.0) continue;
    os << format_double(a) << ' ' << format_double(rb.s_hat_minus) << ' '
       << format_double(rb.s_hat_plus) << ' ' << format_double(rb.s_cap) << "\n";
  }
  return os.str();
}

inline std::string report_bound_dat(const ModelParams& p, const std::vector<double>& lambdas) {
  const BoundVerification v = verify_bound(p, lambdas);
  std::ostringstream meta;
  meta << "what=bound d=" << p.d << " s=" << format_double(p.s)
       << " alpha=" << format_double(p.alpha);
  std::ostringstream os;
  os << provenance_line("report", meta.str(), 0) << "\n";
  os << "# lambda minus_h_form eta_lambda_power err\n";
  const double decay = 2.0 * p.s - 2.0 + 2.0 * p.alpha;
  for (const auto& r : v.rows) {
    os << format_double(r.lambda) << ' ' << format_double(-r.h.value) << ' '
       << format_double(v.eta_closed * std::pow(r.lambda, -decay)) << ' '
       << format_double(r.h.error_estimate) << "\n";
  }
  return os.str();
}

}  // namespace cli
}  // namespace kklab
