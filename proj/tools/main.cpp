// homonmr: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 physics-validation failure.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "homonmr/cli.hpp"
#include "homonmr/sequence.hpp"

namespace cli = homonmr::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string format;
  std::string model;
  int jobs = 0;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> sweep;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw cli::ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key = value configuration file");
  sub->add_option("--out", c.out, "output path (stdout when omitted)");
  sub->add_option("--format", c.format, "csv or json");
  sub->add_option("--jobs", c.jobs, "worker threads for sweeps");
  sub->add_option("--model", c.model, "Hamiltonian model name");
}

void add_param(CLI::App* sub, Common& c, const std::string& flag, const std::string& key,
               const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&c, key](const std::string& v) { c.overrides[key] = v; }, help);
}

cli::RunConfig build_config(Common& c, std::string_view default_preset, cli::Format default_format) {
  std::map<std::string, std::string> base;
  if (!c.config.empty()) base = cli::parse_key_values(read_file(c.config));
  auto ov = c.overrides;
  if (!c.out.empty()) ov["out"] = c.out;
  if (!c.format.empty()) ov["format"] = c.format;
  if (!c.model.empty()) ov["model"] = c.model;
  if (c.jobs != 0) ov["jobs"] = std::to_string(c.jobs);
  if (!c.sweep.empty()) {
    if (c.sweep.size() != 4) throw cli::ConfigError("--sweep takes PARAM START STOP COUNT");
    ov["sweep.parameter"] = c.sweep[0];
    ov["sweep.start"] = c.sweep[1];
    ov["sweep.stop"] = c.sweep[2];
    ov["sweep.count"] = c.sweep[3];
  }
  const bool format_given = base.count("format") || ov.count("format");
  cli::RunConfig cfg = cli::make_config(base, ov, default_preset);
  if (!format_given) cfg.format = default_format;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-spin homonuclear NMR quantum-computing simulator"};
  app.require_subcommand(1);

  Common dj, pps, dist, rwa, parse, translate;
  std::string parse_file;
  std::string translate_file;

  auto* s_dj = app.add_subcommand("dj", "Deutsch-Jozsa run: spectrum, peaks, classification");
  add_common(s_dj, dj);
  add_param(s_dj, dj, "--f", "f", "f1, f2, f3, f4 or all");
  add_param(s_dj, dj, "--tj", "t_j", "two-qubit time (e.g. 70.4ms)");
  add_param(s_dj, dj, "--tau", "tau", "soft-pulse width (hard pulses when omitted)");
  add_param(s_dj, dj, "--tau2", "tau2", "soft-pulse width for spin 2");
  add_param(s_dj, dj, "--readout-duration", "readout_duration", "FID length");
  add_param(s_dj, dj, "--readout-dt", "readout_dt", "FID sample interval");
  s_dj->add_option("--sweep", dj.sweep, "PARAM START STOP COUNT")->expected(4);

  auto* s_pps = app.add_subcommand("pps", "pseudo-pure state preparation");
  add_common(s_pps, pps);
  add_param(s_pps, pps, "--tj", "t_j", "two-qubit time");
  add_param(s_pps, pps, "--compensate", "compensate", "insert the pi-pulse pair (true/false)");
  add_param(s_pps, pps, "--readout-duration", "readout_duration", "FID length");
  add_param(s_pps, pps, "--readout-dt", "readout_dt", "FID sample interval");
  s_pps->add_option("--sweep", pps.sweep, "PARAM START STOP COUNT")->expected(4);

  auto* s_dist = app.add_subcommand("distance", "gate distance to U_E: closed form vs numeric");
  add_common(s_dist, dist);
  add_param(s_dist, dist, "--kind", "kind", "error1, error2 or error3");
  add_param(s_dist, dist, "--t-start", "t_start", "grid start");
  add_param(s_dist, dist, "--t-stop", "t_stop", "grid stop");
  add_param(s_dist, dist, "--points", "points", "grid size");

  auto* s_rwa = app.add_subcommand("validate-rwa", "lab / rotating / secular comparison");
  add_common(s_rwa, rwa);

  auto* s_parse = app.add_subcommand("parse", "parse a sequence file and dump its IR");
  add_common(s_parse, parse);
  s_parse->add_option("file", parse_file, "sequence file")->required();

  auto* s_tr = app.add_subcommand("translate", "replace selective hard pulses by Gaussian soft pulses");
  add_common(s_tr, translate);
  s_tr->add_option("file", translate_file, "sequence file")->required();
  add_param(s_tr, translate, "--tau", "tau", "soft-pulse width");
  add_param(s_tr, translate, "--tau2", "tau2", "soft-pulse width for spin 2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  try {
    cli::Report report;
    cli::RunConfig cfg;
    if (*s_dj) {
      cfg = build_config(dj, "cytosine", cli::Format::Csv);
      report = cli::cmd_dj(cfg);
    } else if (*s_pps) {
      cfg = build_config(pps, "cytosine", cli::Format::Csv);
      report = cli::cmd_pps(cfg);
    } else if (*s_dist) {
      cfg = build_config(dist, "cytosine", cli::Format::Csv);
      report = cli::cmd_distance(cfg);
    } else if (*s_rwa) {
      cfg = build_config(rwa, "scaled", cli::Format::Csv);
      report = cli::cmd_validate_rwa(cfg);
    } else if (*s_parse) {
      cfg = build_config(parse, "cytosine", cli::Format::Text);
      report = cli::cmd_parse(cfg, read_file(parse_file));
    } else {
      cfg = build_config(translate, "cytosine", cli::Format::Text);
      report = cli::cmd_translate(cfg, read_file(translate_file));
    }
    cli::write_report(report, cfg.out, cfg.format);
    if (!report.ok) {
      std::cerr << "validation failed: " << report.message << '\n';
      return cli::kValidationFailure;
    }
    return cli::kOk;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const homonmr::ParseError& e) {
    std::cerr << "sequence error: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::out_of_range& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kValidationFailure;
  }
}
