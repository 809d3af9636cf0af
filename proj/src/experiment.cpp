#include "homonmr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

#include <fftw3.h>

namespace homonmr {

namespace {

struct PulseRef {
  const Pulse* pulse;
  int spin;  // -1 for a nonselective pulse
};

// Walks a sequence column by column and reports unitaries and gradients in
// temporal order.
class Walker {
 public:
  Walker(const HamiltonianModel& model, const SpinSystem& sys, const RunOptions& opts,
         std::function<void(const UnitaryOp&)> on_unitary,
         std::function<void(int)> on_gradient)
      : model_(model),
        sys_(sys),
        opts_(opts),
        frame_(model.frame(sys)),
        on_unitary_(std::move(on_unitary)),
        on_gradient_(std::move(on_gradient)),
        t_(opts.t0) {}

  void run(const Sequence& seq) {
    for (const Column& c : seq.columns) column(c);
  }

  double time() const { return t_; }

 private:
  void column(const Column& c) {
    if (c.joint) {
      if (const auto* g = std::get_if<Gradient>(&c.both)) {
        on_gradient_(g->n_slices);
        return;
      }
    }
    std::vector<PulseRef> pulses;
    auto collect = [&](const Item& it, int spin) {
      if (const auto* p = std::get_if<Pulse>(&it)) pulses.push_back({p, spin});
    };
    if (c.joint) {
      collect(c.both, -1);
    } else {
      collect(c.s1, 0);
      collect(c.s2, 1);
    }
    double d = column_duration(c, sys_, opts_.t_j);

    if (pulses.empty()) {
      if (d > 0.0) integrate(t_, t_ + d, {});
      t_ += d;
      return;
    }

    std::vector<PulseRef> hard;
    std::vector<PulseRef> soft;
    for (const PulseRef& r : pulses) (r.pulse->is_soft() ? soft : hard).push_back(r);

    if (model_.is_lab()) {
      if (!hard.empty()) d = std::max(d, opts_.lab_hard_width);
      std::vector<RfChannel> channels;
      for (const PulseRef& r : pulses) {
        const double w = r.pulse->width.value_or(opts_.lab_hard_width);
        add_channels(channels, r, t_ + 0.5 * (d - w), w, r.pulse->is_soft());
      }
      integrate(t_, t_ + d, std::move(channels));
      t_ += d;
      return;
    }

    if (soft.empty() && d == 0.0) {
      instants(hard, t_);
      return;
    }
    std::vector<RfChannel> channels;
    for (const PulseRef& r : soft) {
      const double w = *r.pulse->width;
      add_channels(channels, r, t_ + 0.5 * (d - w), w, true);
    }
    if (hard.empty()) {
      integrate(t_, t_ + d, std::move(channels));
    } else {
      const double mid = t_ + 0.5 * d;
      integrate(t_, mid, channels);
      instants(hard, mid);
      integrate(mid, t_ + d, std::move(channels));
    }
    t_ += d;
  }

  void add_channels(std::vector<RfChannel>& out, const PulseRef& r, double start,
                    double width, bool soft) const {
    const Pulse& p = *r.pulse;
    const Envelope env =
        soft ? Envelope::gaussian(GaussianEnvelope::calibrated(p.flip(), width).peak, start, width)
             : Envelope::rectangular(p.flip() / width, start, width);
    const double phase = axis_phase(p.axis);
    if (r.spin >= 0) {
      out.push_back({p.carrier.value_or(sys_.larmor(r.spin)), env, phase, r.spin});
    } else if (model_.variant() == ModelVariant::RotatingSecularHetero) {
      for (int k = 0; k < sys_.spin_count(); ++k) out.push_back({sys_.larmor(k), env, phase, k});
    } else {
      out.push_back({p.carrier.value_or(sys_.larmor(0)), env, phase, 0});
    }
  }

  // Zero-width rotations. A selective pulse turns only its target; a
  // nonselective pulse turns every spin with the strength and phase its
  // carrier has in that spin's frame.
  void instants(const std::vector<PulseRef>& pulses, double t) {
    UnitaryOp u = UnitaryOp::identity(sys_.spin_count());
    for (const PulseRef& r : pulses) {
      const Pulse& p = *r.pulse;
      const double phi = axis_phase(p.axis);
      if (r.spin >= 0) {
        const double c = p.carrier.value_or(sys_.larmor(r.spin));
        const double w_rot = frame_.omega_rot[static_cast<size_t>(r.spin)];
        u = pulse_rotation(2, r.spin, p.flip(), phi - (c - w_rot) * t) * u;
        continue;
      }
      const bool hetero = model_.variant() == ModelVariant::RotatingSecularHetero;
      const double c = p.carrier.value_or(sys_.larmor(0));
      for (int k = 0; k < sys_.spin_count(); ++k) {
        const double w_rot = frame_.omega_rot[static_cast<size_t>(k)];
        const double theta = hetero ? p.flip() : p.flip() * sys_.larmor(k) / sys_.larmor(0);
        const double phase = hetero ? phi : phi - (c - w_rot) * t;
        u = pulse_rotation(2, k, theta, phase) * u;
      }
    }
    on_unitary_(u);
  }

  void integrate(double a, double b, std::vector<RfChannel> channels) {
    if (b <= a) return;
    const TimeOperator op = model_operator(model_, sys_, std::move(channels));
    const double dt = opts_.step.value_or(default_step(op, b - a));
    on_unitary_(propagator(op, a, b, dt));
  }

  const HamiltonianModel& model_;
  const SpinSystem& sys_;
  const RunOptions& opts_;
  FrameSpec frame_;
  std::function<void(const UnitaryOp&)> on_unitary_;
  std::function<void(int)> on_gradient_;
  double t_;
};

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double stable_one_minus_cos_product(double a, double b) {
  // 1 - cos a cos b = sin^2((a - b)/2) + sin^2((a + b)/2)
  const double s = std::sin(0.5 * (a - b));
  const double p = std::sin(0.5 * (a + b));
  return s * s + p * p;
}

}  // namespace

DensityState thermal_state(const SpinSystem& sys) {
  return DensityState(spin_op(2, 0, Axis::Z) + sys.g() * spin_op(2, 1, Axis::Z),
                      DensityState::Convention::Deviation);
}

DensityState pseudo_pure_target() {
  ComplexMatrix m = -0.25 * ComplexMatrix::Identity(4, 4);
  m(0, 0) += 1.0;
  return DensityState(std::move(m), DensityState::Convention::Deviation);
}

DensityState run_sequence(const DensityState& state, const Sequence& seq,
                          const HamiltonianModel& model, const SpinSystem& sys,
                          const RunOptions& opts) {
  DensityState rho = state;
  Walker w(
      model, sys, opts, [&](const UnitaryOp& u) { rho = u.apply(rho); },
      [&](int n) { rho = gradient_crush(rho, n); });
  w.run(seq);
  return rho;
}

UnitaryOp sequence_propagator(const Sequence& seq, const HamiltonianModel& model,
                              const SpinSystem& sys, const RunOptions& opts) {
  UnitaryOp total = UnitaryOp::identity(sys.spin_count());
  Walker w(
      model, sys, opts, [&](const UnitaryOp& u) { total = u * total; },
      [](int) {
        throw std::invalid_argument("a sequence with field gradients has no propagator");
      });
  w.run(seq);
  return total;
}

DensityState change_frame(const DensityState& state, const FrameSpec& from,
                          const FrameSpec& to, double t) {
  from.validate();
  to.validate();
  const int n = spin_count(state.dim());
  if (static_cast<int>(from.omega_rot.size()) != n || static_cast<int>(to.omega_rot.size()) != n) {
    throw std::invalid_argument("change_frame: frame size does not match state");
  }
  ComplexMatrix gen = ComplexMatrix::Zero(state.dim(), state.dim());
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<size_t>(k);
    gen += (to.omega_rot[i] - from.omega_rot[i]) * spin_op(n, k, Axis::Z);
  }
  return expm_hermitian(gen, t).apply(state);
}

DensityState to_co_rotating(const DensityState& state, const HamiltonianModel& model,
                            const SpinSystem& sys, double t) {
  return change_frame(state, model.frame(sys), FrameSpec::co_rotating(sys), t);
}

FidTrace readout(const DensityState& state, const SpinSystem& sys, double t_end,
                 const ReadoutOptions& opts) {
  const double limit = kPi / (std::abs(sys.delta_omega()) + sys.coupling() / 2.0);
  if (!(opts.dt > 0.0) || !(opts.dt < limit)) {
    throw SamplingError("readout dt " + std::to_string(opts.dt) +
                        " s does not resolve |dw0| + J/2 (needs dt < " +
                        std::to_string(limit) + " s)");
  }
  const auto n = static_cast<long>(std::llround(opts.duration / opts.dt));
  if (n < 2) throw std::invalid_argument("readout needs at least two samples");

  DensityState rho = pulse_rotation(2, 0, kPi / 2.0, axis_phase(opts.axis)).apply(state);
  rho = change_frame(rho, FrameSpec::co_rotating(sys), FrameSpec::common(sys), t_end);

  const Eigen::VectorXd e = h_conventional(sys).diagonal().real();
  const ComplexMatrix ip = spin_op(2, 0, Axis::X) + Complex(0, 1) * spin_op(2, 0, Axis::Y) +
                           spin_op(2, 1, Axis::X) + Complex(0, 1) * spin_op(2, 1, Axis::Y);
  struct Line {
    Complex amp;
    double omega;
  };
  std::vector<Line> lines;
  for (Eigen::Index a = 0; a < 4; ++a) {
    for (Eigen::Index b = 0; b < 4; ++b) {
      if (ip(b, a) == Complex(0.0)) continue;
      lines.push_back({rho.matrix()(a, b) * ip(b, a), e(a) - e(b)});
    }
  }

  FidTrace fid{std::vector<Complex>(static_cast<size_t>(n)), opts.dt, sys.larmor(0)};
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * opts.dt;
    Complex s = 0.0;
    for (const Line& l : lines) s += l.amp * std::polar(1.0, -l.omega * t);
    fid.samples[static_cast<size_t>(k)] = s * std::exp(-t / sys.t2());
  }
  return fid;
}

Spectrum spectrum(const FidTrace& fid) {
  const size_t n = fid.samples.size();
  if (n < 2 || !(fid.dt > 0.0)) throw std::invalid_argument("spectrum needs >= 2 samples and dt > 0");
  const size_t m = 2 * n;
  fftw_complex* in = fftw_alloc_complex(m);
  fftw_complex* out = fftw_alloc_complex(m);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (size_t k = 0; k < m; ++k) {
    const Complex v = k < n ? fid.samples[k] * (k == 0 ? 0.5 : 1.0) : Complex(0.0);
    in[k][0] = v.real();
    in[k][1] = v.imag();
  }
  fftw_execute(plan);

  Spectrum spec;
  spec.frequencies.reserve(m);
  spec.amplitudes.reserve(m);
  auto push = [&](size_t k) {
    const double idx = k < m / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
    spec.frequencies.push_back(idx / (static_cast<double>(m) * fid.dt));
    spec.amplitudes.push_back(Complex(0.0, -1.0) * Complex(out[k][0], out[k][1]) * fid.dt);
  };
  for (size_t k = m / 2; k-- > 0;) push(k);
  for (size_t k = m; k-- > m / 2;) push(k);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);

  double top = 0.0;
  for (const Complex& a : spec.amplitudes) top = std::max(top, std::abs(a.real()));
  if (top > 0.0) {
    for (size_t i = 1; i + 1 < m; ++i) {
      const double v = std::abs(spec.amplitudes[i].real());
      if (v >= 0.05 * top && v >= std::abs(spec.amplitudes[i - 1].real()) &&
          v > std::abs(spec.amplitudes[i + 1].real())) {
        spec.peaks.push_back({spec.frequencies[i], spec.amplitudes[i].real()});
      }
    }
  }
  return spec;
}

double left_peak_intensity(const Spectrum& spec, const SpinSystem& sys) {
  const double centre = sys.coupling() / (4.0 * kPi);
  const double half = sys.coupling() / (8.0 * kPi);
  double best = 0.0;
  bool found = false;
  for (size_t i = 0; i < spec.frequencies.size(); ++i) {
    if (std::abs(spec.frequencies[i] - centre) > half) continue;
    const double v = spec.amplitudes[i].real();
    if (!found || std::abs(v) > std::abs(best)) best = v;
    found = true;
  }
  if (!found) throw std::runtime_error("missing peak: spectrum does not cover the spin-1 left line");
  return best;
}

std::string_view dj_class_name(DjClass c) {
  switch (c) {
    case DjClass::Constant: return "constant";
    case DjClass::Balanced: return "balanced";
    case DjClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

DjClass classify_dj(const Spectrum& spec, const SpinSystem& sys, double reference) {
  if (!(reference > 0.0)) throw std::invalid_argument("classify_dj: reference must be positive");
  const double v = left_peak_intensity(spec, sys);
  if (std::abs(v) < kIndeterminateFraction * reference) return DjClass::Indeterminate;
  return v > 0.0 ? DjClass::Constant : DjClass::Balanced;
}

double thermal_reference(const SpinSystem& sys, const ReadoutOptions& opts) {
  return left_peak_intensity(spectrum(readout(thermal_state(sys), sys, 0.0, opts)), sys);
}

DistanceKind distance_kind_from_name(std::string_view name) {
  if (name == "error1") return DistanceKind::Error1;
  if (name == "error2") return DistanceKind::Error2;
  if (name == "error3") return DistanceKind::Error3;
  throw std::invalid_argument("unknown distance kind '" + std::string(name) +
                              "' (error1, error2, error3)");
}

std::string_view distance_kind_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::Error1: return "error1";
    case DistanceKind::Error2: return "error2";
    case DistanceKind::Error3: return "error3";
  }
  return "?";
}

double distance_closed_form(DistanceKind kind, const SpinSystem& sys, double t) {
  const double b = (sys.coupling() * t - kPi) / 4.0;
  const double a = kind == DistanceKind::Error1 ? 0.0 : sys.delta_omega() * t / 2.0;
  return 2.0 * std::sqrt(2.0) * std::sqrt(stable_one_minus_cos_product(a, b));
}

double distance_numeric(DistanceKind kind, const SpinSystem& sys, double t) {
  const UnitaryOp target = u_e();
  switch (kind) {
    case DistanceKind::Error1: return frobenius_distance(target.matrix(), u_j(sys, t).matrix());
    case DistanceKind::Error2:
      return frobenius_distance(target.matrix(), u_conventional_j(sys, t).matrix());
    case DistanceKind::Error3:
      return frobenius_distance(target.matrix(), u_j_star(sys, t, 0.0).matrix());
  }
  return 0.0;
}

std::vector<DistancePoint> distance_curve(DistanceKind kind, const SpinSystem& sys,
                                          const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("distance_curve: empty grid");
  std::vector<DistancePoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    out.push_back({t, distance_closed_form(kind, sys, t), distance_numeric(kind, sys, t)});
  }
  return out;
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw std::invalid_argument("linspace: bounds not finite");
  std::vector<double> v(static_cast<size_t>(count));
  if (count == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < count; ++i) {
    v[static_cast<size_t>(i)] = start + (stop - start) * i / (count - 1);
  }
  v.back() = stop;
  return v;
}

DjOutcome run_dj(DjFunction f, const SpinSystem& sys, const HamiltonianModel& model,
                 const DjSettings& settings) {
  Sequence seq = build_dj(f);
  if (settings.taus) seq = translate_hard_to_soft(seq, (*settings.taus)[0], (*settings.taus)[1], sys);
  RunOptions opts;
  opts.t_j = settings.t_j;
  const DensityState out = run_sequence(thermal_state(sys), seq, model, sys, opts);
  const double t_end = total_duration(seq, sys, settings.t_j);
  ReadoutOptions ro = settings.readout;
  if (seq.readout) ro.axis = *seq.readout;
  DjOutcome r{spectrum(readout(to_co_rotating(out, model, sys, t_end), sys, t_end, ro)), 0.0,
              thermal_reference(sys, settings.readout), DjClass::Indeterminate, t_end};
  r.left_peak = left_peak_intensity(r.spectrum, sys);
  r.classification = classify_dj(r.spectrum, sys, r.reference);
  return r;
}

PpsOutcome run_pps(const SpinSystem& sys, const HamiltonianModel& model, double t_j,
                   bool compensate) {
  const Sequence seq = build_pps(compensate);
  RunOptions opts;
  opts.t_j = t_j;
  const double t_end = total_duration(seq, sys, t_j);
  DensityState out = to_co_rotating(run_sequence(thermal_state(sys), seq, model, sys, opts),
                                    model, sys, t_end);
  const Eigen::VectorXd pop = out.populations();
  PpsOutcome r{{pop(0), pop(1), pop(2), pop(3)},
               correlation_fidelity(out, pseudo_pure_target()),
               0,
               out,
               t_end};
  for (int i = 1; i < 4; ++i) {
    if (r.populations[static_cast<size_t>(i)] > r.populations[static_cast<size_t>(r.dominant)]) r.dominant = i;
  }
  return r;
}

std::string_view basis_label(int index) {
  static constexpr std::string_view labels[] = {"|00>", "|01>", "|10>", "|11>"};
  if (index < 0 || index > 3) throw std::out_of_range("basis index");
  return labels[index];
}

namespace {

Sequence rwa_sequence(const SpinSystem& sys, double tau, bool with_pulse) {
  Sequence s;
  s.name = "rwa validation";
  if (with_pulse) {
    s.columns.push_back(Column{false, Nop{}, Pulse{2, PulseAxis::X, tau, sys.larmor(0)}, Nop{}});
  } else {
    s.columns.push_back(Column{true, Delay::literal(tau), Nop{}, Nop{}});
  }
  s.columns.push_back(Column{true, Delay::per_j(2), Nop{}, Nop{}});
  return s;
}

double max_entry_diff(const DensityState& a, const DensityState& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double richardson(const DensityState& a, const DensityState& b, const DensityState& c) {
  return (a.matrix() - b.matrix()).norm() / (b.matrix() - c.matrix()).norm();
}

}  // namespace

RwaReport validate_rwa(const SpinSystem& sys) {
  RwaReport rep{};
  rep.tau = 4.0 * kTwoPi / std::abs(sys.delta_omega());
  const Sequence seq = rwa_sequence(sys, rep.tau, true);
  const double t_end = total_duration(seq, sys);
  const DensityState rho0 = thermal_state(sys);
  const auto lab = HamiltonianModel::lab_exact();
  const auto exact = HamiltonianModel::rotating_exact();
  const auto secular = HamiltonianModel::rotating_secular_homo();

  auto run = [&](const HamiltonianModel& m, const Sequence& s, std::optional<double> step) {
    RunOptions o;
    o.step = step;
    return to_co_rotating(run_sequence(rho0, s, m, sys, o), m, sys, t_end);
  };

  const RfChannel probe{sys.larmor(0), Envelope::constant(0.0), 0.0, 0};
  rep.lab_dt = max_step(lab_operator(sys, {probe}));
  const DensityState l0 = run(lab, seq, rep.lab_dt);
  const DensityState l1 = run(lab, seq, rep.lab_dt / 2);
  const DensityState l2 = run(lab, seq, rep.lab_dt / 4);
  rep.richardson_lab = richardson(l0, l1, l2);

  const double exact_dt =
      max_step(model_operator(exact, sys, {RfChannel{sys.larmor(0), Envelope::constant(0.0), 0.0, 0}}));
  const DensityState e0 = run(exact, seq, exact_dt);
  const DensityState e1 = run(exact, seq, exact_dt / 2);
  const DensityState e2 = run(exact, seq, exact_dt / 4);
  rep.richardson_exact = richardson(e0, e1, e2);

  const DensityState e_fine = run(exact, seq, exact_dt / 10);
  const DensityState s_fine = run(secular, seq, exact_dt / 10);
  rep.fidelity_lab_vs_exact = correlation_fidelity(l2, e_fine);
  rep.fidelity_exact_vs_secular = correlation_fidelity(e_fine, s_fine);
  rep.fidelity_lab_vs_secular = correlation_fidelity(l2, s_fine);

  const Sequence idle = rwa_sequence(sys, rep.tau, false);
  const DensityState zl = run(lab, idle, std::nullopt);
  const DensityState ze = run(exact, idle, std::nullopt);
  const DensityState zs = run(secular, idle, std::nullopt);
  rep.zero_amplitude_lab_vs_exact = max_entry_diff(zl, ze);
  rep.zero_amplitude_exact_vs_secular = max_entry_diff(ze, zs);
  return rep;
}

}  // namespace homonmr
