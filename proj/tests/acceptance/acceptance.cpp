// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is nonzero when a criterion fails that is not in kKnownFailing.
// Those are reported as FAIL all the same; see the README section on known
// deviations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "homonmr/experiment.hpp"

using namespace homonmr;

namespace {

const std::set<int> kKnownFailing = {4, 5, 6};

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

const DjFunction kFunctions[] = {DjFunction::F1, DjFunction::F2, DjFunction::F3, DjFunction::F4};

DjClass expected_class(DjFunction f) {
  return f == DjFunction::F1 || f == DjFunction::F2 ? DjClass::Constant : DjClass::Balanced;
}

// ---------------------------------------------------------------------------

Outcome closed_form_oracle() {
  const auto t0 = Clock::now();
  const SpinSystem sys = SpinSystem::cytosine();
  const auto grid = linspace(0.0, 2.0 * sys.t_j(), 201);
  double worst = 0.0;
  for (DistanceKind k : {DistanceKind::Error1, DistanceKind::Error2, DistanceKind::Error3}) {
    for (const DistancePoint& p : distance_curve(k, sys, grid)) {
      worst = std::max(worst, std::abs(p.closed_form - p.numeric));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-8 && elapsed < 10.0,
          "max |closed - numeric| = " + fmt("%.3g", worst) + ", " + fmt("%.3f", elapsed) + " s"};
}

Outcome c_phase_exactness() {
  const SpinSystem sys = SpinSystem::cytosine();
  const Complex i(0.0, 1.0);
  Eigen::VectorXcd d(4);
  d << std::exp(-i * kPi / 4.0), std::exp(i * kPi / 4.0), std::exp(i * kPi / 4.0),
      std::exp(-i * kPi / 4.0);
  const ComplexMatrix target = d.asDiagonal();
  const double entry = (u_j(sys, kPi / sys.coupling()).matrix() - target).cwiseAbs().maxCoeff();
  const double plus = frobenius_distance(u_j(sys, sys.t_j() + 0.6e-3).matrix(), target);
  const double minus = frobenius_distance(u_j(sys, sys.t_j() - 0.6e-3).matrix(), target);
  return {entry <= 1e-12 && plus < 0.02 && minus < 0.02,
          "max entry error " + fmt("%.3g", entry) + ", distance at T_J+-0.6 ms " +
              fmt("%.4f", plus) + " / " + fmt("%.4f", minus)};
}

struct DjRun {
  DjFunction f;
  double t_j;
  std::array<double, 2> taus;
  DjOutcome out;
  double elapsed;
};

std::vector<DjRun> dj_sweep(const HamiltonianModel& model, bool with_widths) {
  const SpinSystem sys = SpinSystem::cytosine();
  std::vector<DjRun> runs;
  auto go = [&](DjFunction f, double t_j, std::array<double, 2> taus) {
    const auto t0 = Clock::now();
    DjOutcome o = run_dj(f, sys, model, DjSettings{t_j, taus, {}});
    runs.push_back({f, t_j, taus, std::move(o), seconds_since(t0)});
  };
  for (DjFunction f : kFunctions) {
    for (double t : linspace(69.8e-3, 71.0e-3, 7)) go(f, t, {5.229e-3, 5.229e-3});
  }
  if (with_widths) {
    const std::array<double, 2> widths[] = {
        {5.229e-3, 5.229e-3}, {6.217e-3, 6.217e-3}, {5.229e-3, 6.217e-3}};
    for (DjFunction f : kFunctions) {
      for (const auto& w : widths) go(f, sys.t_j(), w);
    }
  }
  return runs;
}

Outcome dj_sign_pattern() {
  const auto runs = dj_sweep(HamiltonianModel::rotating_secular_homo(), true);
  int wrong = 0;
  double slowest = 0.0;
  for (const DjRun& r : runs) {
    wrong += r.out.classification != expected_class(r.f);
    slowest = std::max(slowest, r.elapsed);
  }
  return {wrong == 0 && slowest < 5.0 && runs.size() == 40,
          std::to_string(runs.size() - static_cast<size_t>(wrong)) + "/" +
              std::to_string(runs.size()) + " runs classified as expected, slowest run " +
              fmt("%.3f", slowest) + " s"};
}

Outcome falsification() {
  const SpinSystem sys = SpinSystem::cytosine();
  const auto runs = dj_sweep(HamiltonianModel::falsification_conventional_offset(), false);
  double weakest = 1.0;
  std::string rs;
  for (DjFunction f : kFunctions) {
    std::vector<double> x, y;
    for (const DjRun& r : runs) {
      if (r.f != f) continue;
      x.push_back(std::cos(sys.delta_omega() * r.t_j / 2.0));
      y.push_back(r.out.left_peak);
    }
    const double r = pearson(x, y);
    weakest = std::min(weakest, std::abs(r));
    rs += (rs.empty() ? "" : " ") + fmt("%.3f", r);
  }
  int flipped = 0;
  for (const DjRun& r : runs) flipped += r.out.classification != expected_class(r.f);
  return {weakest > 0.95 && flipped > 0,
          "r(left peak, cos(dw0 t/2)) per f1..f4 = " + rs + "; " + std::to_string(flipped) + "/" +
              std::to_string(runs.size()) + " points flipped or vanished"};
}

Outcome compensation_fragility() {
  const SpinSystem sys = SpinSystem::cytosine();
  const auto model = HamiltonianModel::rotating_secular_homo();
  int dominant00 = 0;
  const auto grid = linspace(69.3e-3, 70.6e-3, 8);
  for (double t : grid) dominant00 += run_pps(sys, model, t, false).dominant == 0;
  const double f_plain = run_pps(sys, model, 70.4e-3, false).fidelity;
  const double f_comp = run_pps(sys, model, 70.4e-3, true).fidelity;
  const PpsOutcome off = run_pps(sys, model, 69.7e-3, true);
  // Fidelities are compared with a roundoff allowance.
  const bool sharper = f_comp >= f_plain - 1e-9;
  const bool moved = off.dominant == 1;
  return {dominant00 == static_cast<int>(grid.size()) && sharper && moved,
          "uncompensated |00> dominant at " + std::to_string(dominant00) + "/8; fidelity at 70.4 ms " +
              fmt("%.12f", f_comp) + " (comp) vs " + fmt("%.12f", f_plain) +
              "; compensated 69.7 ms dominant " + std::string(basis_label(off.dominant))};
}

Outcome translation_claim() {
  const SpinSystem sys = SpinSystem::cytosine();
  double worst = 1.0;
  std::string all;
  for (DjFunction f : kFunctions) {
    const Sequence hard = build_dj(f);
    const Sequence soft = translate_hard_to_soft(hard, 5.229e-3, sys);
    const UnitaryOp u_soft = sequence_propagator(soft, HamiltonianModel::rotating_secular_homo(), sys);
    const UnitaryOp u_hard = sequence_propagator(hard, HamiltonianModel::rotating_secular_hetero(), sys);
    const double fid = gate_fidelity(u_soft, u_hard);
    worst = std::min(worst, fid);
    all += (all.empty() ? "" : " ") + fmt("%.4f", fid);
  }
  return {worst > 0.99, "gate fidelity f1..f4 = " + all};
}

Outcome rwa_ladder() {
  const auto t0 = Clock::now();
  const RwaReport r = validate_rwa(SpinSystem::scaled_validation());
  const double elapsed = seconds_since(t0);
  const bool ok = r.fidelity_lab_vs_exact > 0.999 && r.fidelity_exact_vs_secular > 0.99 &&
                  r.richardson_lab >= 3.5 && r.richardson_lab <= 4.5 &&
                  r.richardson_exact >= 3.5 && r.richardson_exact <= 4.5 && elapsed < 300.0;
  return {ok, "lab/exact " + fmt("%.8f", r.fidelity_lab_vs_exact) + ", exact/secular " +
                  fmt("%.6f", r.fidelity_exact_vs_secular) + ", Richardson lab " +
                  fmt("%.3f", r.richardson_lab) + " exact " + fmt("%.3f", r.richardson_exact) +
                  ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome structural_suite() {
  const SpinSystem sys = SpinSystem::cytosine();
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  // Unitarity, trace and Hermiticity along full runs.
  for (const auto& model : {HamiltonianModel::rotating_secular_homo(), HamiltonianModel::rotating_exact()}) {
    for (DjFunction f : kFunctions) {
      const Sequence soft = translate_hard_to_soft(build_dj(f), 5.229e-3, sys);
      const UnitaryOp u = sequence_propagator(soft, model, sys);
      const double unit = (u.matrix().adjoint() * u.matrix() - ComplexMatrix::Identity(4, 4)).norm();
      expect(unit < 1e-9, "unitarity");
      const DensityState in = thermal_state(sys);
      const DensityState out = run_sequence(in, soft, model, sys);
      expect(std::abs(out.matrix().trace()) < 1e-9, "trace");
      expect(is_hermitian(out.matrix(), 1e-9), "hermiticity");
      const double p0 = (in.matrix() * in.matrix()).trace().real();
      const double p1 = (out.matrix() * out.matrix()).trace().real();
      expect(std::abs(p1 - p0) < 1e-9, "purity");
    }
    const DensityState pps = run_sequence(thermal_state(sys), build_pps(), model, sys);
    expect(std::abs(pps.matrix().trace()) < 1e-9 && is_hermitian(pps.matrix(), 1e-9),
           "pps trace/hermiticity");
  }

  // Composition: the propagator of a sequence equals the product over a split.
  {
    const Sequence soft = translate_hard_to_soft(build_dj(DjFunction::F3), 5.229e-3, sys);
    const auto model = HamiltonianModel::rotating_exact();
    Sequence a = soft, b = soft;
    a.columns.resize(3);
    b.columns.erase(b.columns.begin(), b.columns.begin() + 3);
    RunOptions later;
    later.t0 = total_duration(a, sys);
    const UnitaryOp whole = sequence_propagator(soft, model, sys);
    const UnitaryOp split = sequence_propagator(b, model, sys, later) * sequence_propagator(a, model, sys);
    expect(frobenius_distance(whole.matrix(), split.matrix()) < 1e-9, "composition");
  }

  // Gradient crush.
  {
    std::mt19937 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      ComplexMatrix m(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = Complex(n(rng), n(rng));
      ComplexMatrix h = 0.5 * (m + m.adjoint());
      h -= (h.trace() / 4.0) * ComplexMatrix::Identity(4, 4);
      const DensityState s(h, DensityState::Convention::Deviation);
      const DensityState once = gradient_crush(s);
      expect(approx_equal(gradient_crush(once).matrix(), once.matrix(), 1e-12), "crush idempotence");
      expect(std::abs(once.matrix()(1, 2) - h(1, 2)) < 1e-12, "zero-quantum preservation");
    }
  }

  // Parser round trip.
  {
    std::vector<Sequence> seqs;
    for (DjFunction f : kFunctions) {
      seqs.push_back(build_dj(f));
      seqs.push_back(translate_hard_to_soft(build_dj(f), 5.229e-3, 6.217e-3, sys));
    }
    seqs.push_back(build_pps(false));
    seqs.push_back(build_pps(true));
    for (const Sequence& s : seqs) {
      // The builders' name line is a comment, so text identity is checked
      // from the first reparse on.
      const Sequence back = parse_sequence(print_sequence(s));
      const std::string text = print_sequence(back);
      expect(back == s && print_sequence(parse_sequence(text)) == text, "round trip");
    }
  }

  // Gaussian calibration.
  for (double flip : {kPi / 4, kPi / 2, kPi}) {
    for (int k = 0; k <= 18; ++k) {
      const double width = 1e-3 + k * 0.5e-3;
      const GaussianEnvelope g = GaussianEnvelope::calibrated(flip, width);
      expect(std::abs(g.integrate() - flip) / flip < 1e-6, "gaussian calibration");
    }
  }

  std::string detail = failed.empty() ? "all properties hold" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed-form distance oracle", closed_form_oracle},
      {"c-phase exactness and timing robustness", c_phase_exactness},
      {"Deutsch-Jozsa sign pattern", dj_sign_pattern},
      {"conventional-Hamiltonian falsification", falsification},
      {"compensation fragility", compensation_fragility},
      {"hard-to-soft translation fidelity", translation_claim},
      {"rotating-wave ladder", rwa_ladder},
      {"structural properties", structural_suite},
  };

  int unexpected = 0;
  int passed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool known = kKnownFailing.count(id) != 0;
    std::printf("%s  %d  %-42s %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), !o.pass && known ? "  [known]" : "");
    std::fflush(stdout);
    passed += o.pass;
    if (!o.pass && !known) ++unexpected;
  }
  std::printf("%d/%zu criteria pass, %d unexpected failure(s)\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
