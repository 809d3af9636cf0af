#include "homonmr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "homonmr/experiment.hpp"
#include "homonmr/sequence.hpp"

namespace homonmr::cli {

namespace {

const std::set<std::string>& command_keys() {
  static const std::set<std::string> keys = {
      "f", "t_j", "tau", "tau2", "compensate", "kind", "t_start", "t_stop", "points",
      "readout_duration", "readout_dt", "sequence"};
  return keys;
}

std::string trim(std::string_view s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double to_number(const std::string& key, const std::string& v) {
  size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x)) {
    throw ConfigError("config key '" + key + "': expected a finite number, got '" + v + "'");
  }
  return x;
}

double to_seconds(const std::string& key, const std::string& v) {
  try {
    return parse_duration(v);
  } catch (const std::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_number(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return static_cast<int>(x);
}

Table spectrum_table(const Spectrum& s) {
  Table t{"spectrum", {"offset_hz", "real", "imag"}, {}};
  t.rows.reserve(s.frequencies.size());
  for (size_t i = 0; i < s.frequencies.size(); ++i) {
    t.rows.push_back({s.frequencies[i], s.amplitudes[i].real(), s.amplitudes[i].imag()});
  }
  return t;
}

Table peak_table(const Spectrum& s) {
  Table t{"peaks", {"offset_hz", "intensity"}, {}};
  for (const Peak& p : s.peaks) t.rows.push_back({p.offset_hz, p.intensity});
  return t;
}

ReadoutOptions readout_options(const RunConfig& cfg) {
  ReadoutOptions ro;
  ro.duration = cfg.seconds("readout_duration", 5.0 * cfg.system.t2());
  ro.dt = cfg.seconds("readout_dt", ro.dt);
  return ro;
}

std::vector<double> sweep_points(const RunConfig& cfg, const std::set<std::string>& allowed,
                                 std::string& parameter) {
  if (!cfg.sweep) return {};
  if (!allowed.count(cfg.sweep->parameter)) {
    std::string names;
    for (const auto& a : allowed) names += (names.empty() ? "" : ", ") + a;
    throw ConfigError("this command cannot sweep '" + cfg.sweep->parameter + "' (allowed: " + names + ")");
  }
  parameter = cfg.sweep->parameter;
  return linspace(cfg.sweep->start, cfg.sweep->stop, cfg.sweep->count);
}

std::string pulse_track_name(int spin) { return spin == 0 ? "s1" : "s2"; }

void describe_item(Table& t, int index, const std::string& track, const Item& it) {
  std::vector<Cell> row{static_cast<double>(index), track};
  if (std::holds_alternative<Nop>(it)) {
    row.insert(row.end(), {std::string("nop"), std::string(), std::string(), std::string(),
                           std::string(), std::string()});
  } else if (const auto* g = std::get_if<Gradient>(&it)) {
    row.insert(row.end(), {std::string("gradient"), std::string(), std::string(), std::string(),
                           std::string(), std::to_string(g->n_slices) + " slices"});
  } else if (const auto* d = std::get_if<Delay>(&it)) {
    row.insert(row.end(), {std::string("delay"), std::string(), std::string(), std::string(),
                           std::string(), d->label()});
  } else {
    const auto& p = std::get<Pulse>(it);
    row.push_back(std::string(p.is_soft() ? "soft pulse" : "hard pulse"));
    row.push_back(p.flip());
    row.push_back(std::string(axis_token(p.axis)));
    row.push_back(p.width ? Cell{*p.width} : Cell{std::string()});
    row.push_back(p.carrier ? Cell{*p.carrier} : Cell{std::string()});
    row.push_back(std::string());
  }
  t.rows.push_back(std::move(row));
}

Report sequence_report(const std::string& command, const Sequence& seq) {
  Report r;
  r.command = command;
  r.text = print_sequence(seq);
  Table t{"columns", {"column", "track", "kind", "flip_rad", "axis", "width_s", "carrier_rad_s", "duration"}, {}};
  for (size_t i = 0; i < seq.columns.size(); ++i) {
    const Column& c = seq.columns[i];
    const int idx = static_cast<int>(i);
    if (c.joint) {
      describe_item(t, idx, "both", c.both);
    } else {
      describe_item(t, idx, pulse_track_name(0), c.s1);
      describe_item(t, idx, pulse_track_name(1), c.s2);
    }
  }
  if (seq.readout) {
    describe_item(t, static_cast<int>(seq.columns.size()), "readout",
                  Pulse{2, *seq.readout, std::nullopt, std::nullopt});
  }
  r.tables.push_back(std::move(t));
  return r;
}

}  // namespace

Format format_from_name(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (name == "text") return Format::Text;
  throw ConfigError("unknown output format '" + std::string(name) + "' (csv, json)");
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double RunConfig::seconds(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : to_seconds(key, it->second);
}

double RunConfig::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : to_number(key, it->second);
}

int RunConfig::integer(const std::string& key, int fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : to_int(key, it->second);
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    if (kv.count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    kv[key] = value;
  }
  return kv;
}

RunConfig make_config(const std::map<std::string, std::string>& base,
                      const std::map<std::string, std::string>& overrides,
                      std::string_view default_preset) {
  std::map<std::string, std::string> kv = base;
  for (const auto& [k, v] : overrides) kv[k] = v;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  RunConfig cfg;
  const std::string preset = take("preset").value_or(std::string(default_preset));
  if (preset == "cytosine") {
    cfg.system = SpinSystem::cytosine();
  } else if (preset == "scaled") {
    cfg.system = SpinSystem::scaled_validation();
  } else {
    throw ConfigError("unknown preset '" + preset + "' (cytosine, scaled)");
  }

  const SpinSystem& p = cfg.system;
  double w1 = p.larmor(0);
  double w2 = p.larmor(1);
  const auto reference = take("reference_hz");
  const auto delta = take("delta_hz");
  const auto l1 = take("larmor1_hz");
  const auto l2 = take("larmor2_hz");
  if ((reference || delta) && (l1 || l2)) {
    throw ConfigError("give either reference_hz/delta_hz or larmor1_hz/larmor2_hz, not both");
  }
  if (reference || delta) {
    w1 = reference ? kTwoPi * to_number("reference_hz", *reference) : w1;
    w2 = w1 + (delta ? kTwoPi * to_number("delta_hz", *delta) : p.delta_omega());
  }
  if (l1) w1 = kTwoPi * to_number("larmor1_hz", *l1);
  if (l2) w2 = kTwoPi * to_number("larmor2_hz", *l2);
  const auto j = take("j_hz");
  const auto t2 = take("t2");
  const auto t1 = take("t1");
  try {
    cfg.system = SpinSystem({w1, w2}, j ? kTwoPi * to_number("j_hz", *j) : p.coupling(),
                            t2 ? to_seconds("t2", *t2) : p.t2(), t1 ? to_seconds("t1", *t1) : p.t1());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid spin system: ") + e.what());
  }

  if (auto m = take("model")) {
    try {
      cfg.model = HamiltonianModel::from_name(*m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto v = take("out")) cfg.out = *v;
  if (auto v = take("format")) cfg.format = format_from_name(*v);
  if (auto v = take("jobs")) {
    cfg.jobs = to_int("jobs", *v);
    if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  }

  const auto sp = take("sweep.parameter");
  const auto s0 = take("sweep.start");
  const auto s1 = take("sweep.stop");
  const auto sc = take("sweep.count");
  if (sp || s0 || s1 || sc) {
    if (!(sp && s0 && s1 && sc)) {
      throw ConfigError("a sweep needs sweep.parameter, sweep.start, sweep.stop and sweep.count");
    }
    Sweep s{*sp, to_seconds("sweep.start", *s0), to_seconds("sweep.stop", *s1),
            to_int("sweep.count", *sc)};
    if (s.count < 1) throw ConfigError("sweep.count must be >= 1");
    cfg.sweep = s;
  }

  for (auto& [k, v] : kv) {
    if (!command_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");
    cfg.params[k] = v;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const Table& t) {
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_double(*d);
      } else {
        const std::string& s = std::get<std::string>(row[i]);
        const bool quote = s.find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
          out += s;
        } else {
          out += '"';
          for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
          out += '"';
        }
      }
    }
    out += '\n';
  }
  return out;
}

std::string render_json(const Report& r) {
  nlohmann::ordered_json doc;
  doc["command"] = r.command;
  doc["ok"] = r.ok;
  if (!r.message.empty()) doc["message"] = r.message;
  nlohmann::ordered_json tables = nlohmann::ordered_json::object();
  for (const Table& t : r.tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json jr = nlohmann::ordered_json::array();
      for (const Cell& c : row) {
        if (const auto* d = std::get_if<double>(&c)) {
          jr.push_back(*d);
        } else {
          jr.push_back(std::get<std::string>(c));
        }
      }
      rows.push_back(std::move(jr));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  doc["tables"] = std::move(tables);
  return doc.dump(2) + "\n";
}

void write_report(const Report& r, const std::string& out, Format format) {
  auto emit = [](const std::string& path, const std::string& body) {
    if (path.empty()) {
      std::cout << body;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    f << body;
    if (!f) throw ConfigError("failed writing '" + path + "'");
  };
  if (format == Format::Json) {
    emit(out, render_json(r));
    return;
  }
  if (format == Format::Text && !r.text.empty()) {
    emit(out, r.text);
    return;
  }
  if (out.empty()) {
    for (size_t i = 0; i < r.tables.size(); ++i) {
      if (r.tables.size() > 1) std::cout << (i ? "\n" : "") << "# " << r.tables[i].name << '\n';
      std::cout << render_csv(r.tables[i]);
    }
    return;
  }
  std::string stem = out;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  for (size_t i = 0; i < r.tables.size(); ++i) {
    emit(i == 0 ? out : stem + "." + r.tables[i].name + ".csv", render_csv(r.tables[i]));
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

Report cmd_dj(const RunConfig& cfg) {
  const SpinSystem& sys = cfg.system;
  const std::string fname = cfg.text("f", "f1");
  std::vector<DjFunction> fs;
  if (fname == "all") {
    fs = {DjFunction::F1, DjFunction::F2, DjFunction::F3, DjFunction::F4};
  } else {
    try {
      fs = {dj_function_from_name(fname)};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const double t_j = cfg.seconds("t_j", sys.t_j());
  std::optional<double> tau1;
  std::optional<double> tau2;
  if (cfg.has("tau")) tau1 = cfg.seconds("tau", 0.0);
  if (cfg.has("tau2")) tau2 = cfg.seconds("tau2", 0.0);
  if (tau2 && !tau1) throw ConfigError("tau2 needs tau");
  const ReadoutOptions ro = readout_options(cfg);

  std::string param;
  const std::vector<double> pts = sweep_points(cfg, {"t_j", "tau", "tau1", "tau2"}, param);
  const int n_points = pts.empty() ? 1 : static_cast<int>(pts.size());

  struct Point {
    DjFunction f;
    DjSettings settings;
  };
  std::vector<Point> work;
  for (DjFunction f : fs) {
    for (int i = 0; i < n_points; ++i) {
      DjSettings s{t_j, std::nullopt, ro};
      std::optional<double> a = tau1;
      std::optional<double> b = tau2 ? tau2 : tau1;
      if (!pts.empty()) {
        const double v = pts[static_cast<size_t>(i)];
        if (param == "t_j") s.t_j = v;
        if (param == "tau" || param == "tau1") a = v;
        if (param == "tau" || param == "tau2") b = v;
        if (param == "tau1" && !b) b = tau1;
        if (param == "tau2" && !a) throw ConfigError("sweeping tau2 needs tau");
      }
      if (a) s.taus = std::array<double, 2>{*a, b.value_or(*a)};
      work.push_back({f, s});
    }
  }

  const auto results = parallel_map(static_cast<int>(work.size()), cfg.jobs, [&](int i) {
    return run_dj(work[static_cast<size_t>(i)].f, sys, cfg.model, work[static_cast<size_t>(i)].settings);
  });

  Report r;
  r.command = "dj";
  Table summary{"summary",
                {"f", "t_j_s", "tau1_s", "tau2_s", "left_peak", "reference", "classification"},
                {}};
  for (size_t i = 0; i < work.size(); ++i) {
    const DjSettings& s = work[i].settings;
    summary.rows.push_back({"f" + std::to_string(static_cast<int>(work[i].f)), s.t_j,
                            s.taus ? Cell{(*s.taus)[0]} : Cell{std::string("hard")},
                            s.taus ? Cell{(*s.taus)[1]} : Cell{std::string("hard")},
                            results[i].left_peak, results[i].reference,
                            std::string(dj_class_name(results[i].classification))});
  }
  if (work.size() == 1) {
    r.tables.push_back(spectrum_table(results[0].spectrum));
    r.tables.push_back(peak_table(results[0].spectrum));
  }
  r.tables.push_back(std::move(summary));
  return r;
}

Report cmd_pps(const RunConfig& cfg) {
  const SpinSystem& sys = cfg.system;
  const double t_j = cfg.seconds("t_j", sys.t_j());
  const bool compensate = cfg.flag("compensate", false);
  const ReadoutOptions ro = readout_options(cfg);
  std::string param;
  std::vector<double> pts = sweep_points(cfg, {"t_j"}, param);
  const bool sweep = !pts.empty();
  if (!sweep) pts = {t_j};

  const auto results = parallel_map(static_cast<int>(pts.size()), cfg.jobs, [&](int i) {
    return run_pps(sys, cfg.model, pts[static_cast<size_t>(i)], compensate);
  });

  Report r;
  r.command = "pps";
  Table summary{"summary",
                {"t_j_s", "compensate", "p00", "p01", "p10", "p11", "fidelity", "dominant",
                 "dominant_is_00"},
                {}};
  for (size_t i = 0; i < pts.size(); ++i) {
    const PpsOutcome& o = results[i];
    summary.rows.push_back({pts[i], std::string(compensate ? "true" : "false"), o.populations[0],
                            o.populations[1], o.populations[2], o.populations[3], o.fidelity,
                            std::string(basis_label(o.dominant)),
                            std::string(o.dominant == 0 ? "true" : "false")});
  }
  if (!sweep) {
    Table pop{"populations", {"state", "population"}, {}};
    for (int k = 0; k < 4; ++k) {
      pop.rows.push_back({std::string(basis_label(k)), results[0].populations[static_cast<size_t>(k)]});
    }
    r.tables.push_back(std::move(pop));
    const Spectrum s = spectrum(readout(results[0].state, sys, results[0].duration, ro));
    r.tables.push_back(spectrum_table(s));
    r.tables.push_back(peak_table(s));
  }
  r.tables.push_back(std::move(summary));
  return r;
}

Report cmd_distance(const RunConfig& cfg) {
  const SpinSystem& sys = cfg.system;
  DistanceKind kind;
  try {
    kind = distance_kind_from_name(cfg.text("kind", "error1"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const double t0 = cfg.seconds("t_start", 0.0);
  const double t1 = cfg.seconds("t_stop", 2.0 * sys.t_j());
  const int points = cfg.integer("points", 201);
  if (points < 2) throw ConfigError("points must be >= 2");
  if (!(t1 > t0)) throw ConfigError("t_stop must exceed t_start");
  const auto grid = linspace(t0, t1, points);
  const auto rows = parallel_map(points, cfg.jobs, [&](int i) {
    const double t = grid[static_cast<size_t>(i)];
    return DistancePoint{t, distance_closed_form(kind, sys, t), distance_numeric(kind, sys, t)};
  });

  Report r;
  r.command = "distance";
  Table t{std::string(distance_kind_name(kind)), {"t", "closed_form", "numeric", "abs_diff"}, {}};
  double worst = 0.0;
  for (const DistancePoint& p : rows) {
    const double diff = std::abs(p.closed_form - p.numeric);
    worst = std::max(worst, diff);
    t.rows.push_back({p.t, p.closed_form, p.numeric, diff});
  }
  r.tables.push_back(std::move(t));
  r.ok = worst < 1e-8;
  if (!r.ok) r.message = "closed form and numeric distance differ by " + format_double(worst);
  return r;
}

Report cmd_validate_rwa(const RunConfig& cfg) {
  const RwaReport rep = validate_rwa(cfg.system);
  Report r;
  r.command = "validate-rwa";
  Table t{"rwa", {"metric", "value", "lower", "upper", "pass"}, {}};
  auto add = [&](const std::string& name, double v, double lo, double hi) {
    const bool pass = v >= lo && v <= hi;
    r.ok = r.ok && pass;
    t.rows.push_back({name, v, lo, hi, std::string(pass ? "true" : "false")});
  };
  add("fidelity_lab_vs_rotating_exact", rep.fidelity_lab_vs_exact, 0.999, 1.0 + 1e-12);
  add("fidelity_rotating_exact_vs_secular_homo", rep.fidelity_exact_vs_secular, 0.99, 1.0 + 1e-12);
  add("richardson_ratio_lab", rep.richardson_lab, 3.5, 4.5);
  add("zero_amplitude_lab_vs_rotating_exact", rep.zero_amplitude_lab_vs_exact, 0.0, 1e-6);
  t.rows.push_back({std::string("fidelity_lab_vs_secular_homo"), rep.fidelity_lab_vs_secular,
                    std::string(), std::string(), std::string("info")});
  t.rows.push_back({std::string("zero_amplitude_rotating_exact_vs_secular_homo"),
                    rep.zero_amplitude_exact_vs_secular, std::string(), std::string(),
                    std::string("info")});
  t.rows.push_back({std::string("richardson_ratio_rotating_exact"), rep.richardson_exact,
                    std::string(), std::string(), std::string("info")});
  t.rows.push_back({std::string("pulse_width_s"), rep.tau, std::string(), std::string(),
                    std::string("info")});
  t.rows.push_back({std::string("lab_step_s"), rep.lab_dt, std::string(), std::string(),
                    std::string("info")});
  r.tables.push_back(std::move(t));
  if (!r.ok) r.message = "approximation ladder check failed";
  return r;
}

Report cmd_parse(const RunConfig&, std::string_view source) {
  return sequence_report("parse", parse_sequence(source));
}

Report cmd_translate(const RunConfig& cfg, std::string_view source) {
  if (!cfg.has("tau")) throw ConfigError("translate needs tau");
  const double tau1 = cfg.seconds("tau", 0.0);
  const double tau2 = cfg.seconds("tau2", tau1);
  Sequence seq = parse_sequence(source);
  seq = translate_hard_to_soft(seq, tau1, tau2, cfg.system);
  return sequence_report("translate", seq);
}

}  // namespace homonmr::cli
