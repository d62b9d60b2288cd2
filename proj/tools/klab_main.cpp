// klab: command-line laboratory for the nonsmooth Kazantsev-Kraichnan model.
//
// Subcommands: region, constants, mellin-check, verify-bound, simulate, report.
// Scalar tables are emitted as JSON, series as CSV; every artifact carries a
// provenance header.  Exit codes: 0 success, 1 numerical nonconvergence,
// 2 configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kklab/cli.hpp"

namespace {

using namespace kklab;

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    atomic_write_file(out_path, content);
  }
}

std::string json_with_meta(nlohmann::ordered_json j, const std::string& subcommand,
                           std::uint64_t seed, const std::string& params) {
  nlohmann::ordered_json meta;
  meta["tool"] = "kklab";
  meta["version"] = version_string;
  meta["subcommand"] = subcommand;
  meta["seed"] = seed;
  meta["parameters"] = params;
  j["meta"] = meta;
  return j.dump(2) + "\n";
}

// "8,16,...,256": the ... token doubles the last value until the bound
std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string item;
  std::vector<std::string> toks;
  while (std::getline(is, item, ',')) toks.push_back(item);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::string t = toks[i];
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    if (t == "..." || t == "..") {
      if (out.size() < 2 || i + 1 != toks.size() - 1)
        throw domain_error("lambda list: '...' needs two leading values and one trailing bound");
      const double ratio = out[out.size() - 1] / out[out.size() - 2];
      const double stop = cli::parse_number(toks[i + 1], "lambdas");
      double v = out.back() * ratio;
      while (v < stop * (1.0 - 1e-9)) {
        out.push_back(v);
        v *= ratio;
      }
      out.push_back(stop);
      return out;
    }
    out.push_back(cli::parse_number(t, "lambdas"));
  }
  if (out.empty()) throw domain_error("lambda list: empty");
  return out;
}

std::map<std::string, double> parse_params_list(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw domain_error("--params expects name=value pairs separated by commas");
    std::string key = item.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    out[key] = cli::parse_number(item.substr(eq + 1), key);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kklab: constants, asymptotics and spectral simulation of the "
               "nonsmooth Kazantsev-Kraichnan model"};
  app.require_subcommand(1);

  int d = 3;
  double s = 1.25, alpha = 0.25;
  double s_opt = std::numeric_limits<double>::quiet_NaN();
  std::string out_path, config_path, family, params_text, z_text = "1,0";
  std::string lambdas_text = "8,16,...,256", what = "region";
  std::uint64_t seed = 0;
  std::size_t mc_samples = 0;

  auto* region = app.add_subcommand("region", "admissible-parameter geometry for fixed d, alpha");
  region->add_option("--d", d)->required();
  region->add_option("--alpha", alpha)->required();
  region->add_option("--s", s_opt, "also evaluate the alpha roots at this s");
  region->add_option("--out", out_path);

  auto* constants = app.add_subcommand("constants", "closed-form constants at (d, s, alpha)");
  constants->add_option("--d", d)->required();
  constants->add_option("--s", s)->required();
  constants->add_option("--alpha", alpha)->required();
  constants->add_option("--out", out_path);

  auto* mellin = app.add_subcommand("mellin-check", "closed form vs numeric Mellin transform");
  mellin->add_option("--family", family, "lorentzian | angular")->required();
  mellin->add_option("--params", params_text, "e.g. b=1.75 or a=4,b=3,s=1.25")->required();
  mellin->add_option("--z", z_text, "evaluation point re,im");
  mellin->add_option("--out", out_path);

  auto* bound = app.add_subcommand("verify-bound", "symbol integrals across a lambda grid");
  bound->add_option("--d", d)->required();
  bound->add_option("--s", s)->required();
  bound->add_option("--alpha", alpha)->required();
  bound->add_option("--lambdas", lambdas_text, "e.g. 8,16,...,256");
  bound->add_option("--mc-samples", mc_samples, "use Monte Carlo with this many samples");
  bound->add_option("--seed", seed);
  bound->add_option("--out", out_path);

  auto* simulate = app.add_subcommand("simulate", "ensemble SPDE run from a key=value config");
  simulate->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path);

  auto* report = app.add_subcommand("report", "gnuplot-ready data files");
  report->add_option("--what", what, "region | bound")->required();
  report->add_option("--d", d);
  report->add_option("--s", s);
  report->add_option("--alpha", alpha);
  report->add_option("--lambdas", lambdas_text);
  report->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (region->parsed()) {
      std::optional<double> so;
      if (std::isfinite(s_opt)) so = s_opt;
      std::ostringstream ps;
      ps << "d=" << d << " alpha=" << kklab::format_double(alpha);
      emit(json_with_meta(cli::region_json(d, alpha, so), "region", 0, ps.str()), out_path);
    } else if (constants->parsed()) {
      std::ostringstream ps;
      ps << "d=" << d << " s=" << kklab::format_double(s)
         << " alpha=" << kklab::format_double(alpha);
      emit(json_with_meta(cli::constants_json({d, s, alpha}), "constants", 0, ps.str()),
           out_path);
    } else if (mellin->parsed()) {
      const auto zs = cli::parse_number_list(z_text, "z");
      const Complex z(zs.at(0), zs.size() > 1 ? zs.at(1) : 0.0);
      auto j = cli::mellin_check_json(family, parse_params_list(params_text), z);
      const bool ok = j["converged"].get<bool>();
      emit(json_with_meta(j, "mellin-check", 0, "family=" + family), out_path);
      return ok ? kklab::exit_ok : kklab::exit_nonconvergence;
    } else if (bound->parsed()) {
      const auto lambdas = parse_lambdas(lambdas_text);
      emit(cli::verify_bound_csv({d, s, alpha}, lambdas, mc_samples, seed), out_path);
    } else if (simulate->parsed()) {
      std::ifstream in(config_path);
      std::stringstream buf;
      buf << in.rdbuf();
      const SimConfig cfg = cli::parse_simulate_config(buf.str());
      emit(cli::simulate_csv(cfg), out_path);
    } else if (report->parsed()) {
      if (what == "region") {
        emit(cli::report_region_dat(d), out_path);
      } else if (what == "bound") {
        emit(cli::report_bound_dat({d, s, alpha}, parse_lambdas(lambdas_text)), out_path);
      } else {
        throw domain_error("report --what must be region or bound");
      }
    }
  } catch (const kklab::nonconvergence_error& e) {
    std::cerr << "nonconvergence: " << e.what() << "\n";
    return kklab::exit_nonconvergence;
  } catch (const kklab::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kklab::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kklab::exit_config_error;
  }
  return kklab::exit_ok;
}
