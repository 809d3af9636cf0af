#include "homonmr/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace homonmr {

namespace {

struct Ops {
  ComplexMatrix ix[2], iy[2], iz[2];
  ComplexMatrix ixx, iyy, izz;
};

const Ops& ops() {
  static const Ops o = [] {
    Ops r;
    for (int s = 0; s < 2; ++s) {
      r.ix[s] = spin_op(2, s, Axis::X);
      r.iy[s] = spin_op(2, s, Axis::Y);
      r.iz[s] = spin_op(2, s, Axis::Z);
    }
    r.ixx = r.ix[0] * r.ix[1];
    r.iyy = r.iy[0] * r.iy[1];
    r.izz = r.iz[0] * r.iz[1];
    return r;
  }();
  return o;
}

// Magnetic quantum number (+1/2 for |0>) of `spin` in basis state `index`.
double m_of(Eigen::Index index, int spin, int n_spins) {
  const int bit = n_spins - 1 - spin;
  return ((index >> bit) & 1) ? -0.5 : 0.5;
}

void require_two_spins(const SpinSystem& sys) {
  if (sys.spin_count() != 2) {
    throw std::invalid_argument("only two-spin systems are supported");
  }
}

void require_resonant(const SpinSystem& sys, const RfChannel& channel) {
  const double w0 = sys.larmor(channel.target);
  if (std::abs(channel.carrier - w0) > 1e-9 * w0) {
    throw std::invalid_argument(
        "rf carrier is off resonance with spin " +
        std::to_string(channel.target + 1) +
        "; off-resonant pulses need the lab or rotating-exact model");
  }
}

// -omega_1 * strength * (cos(phase) Ix_k + sin(phase) Iy_k)
void add_transverse(ComplexMatrix& h, int spin, double amplitude, double phase) {
  const Ops& o = ops();
  h -= amplitude * (std::cos(phase) * o.ix[spin] + std::sin(phase) * o.iy[spin]);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpinSystem
// ---------------------------------------------------------------------------

SpinSystem::SpinSystem(std::vector<double> larmor, double coupling, double t2,
                       double t1)
    : larmor_(std::move(larmor)), coupling_(coupling), t2_(t2), t1_(t1) {
  if (larmor_.size() != 2) {
    throw std::invalid_argument("spin system needs exactly two Larmor frequencies");
  }
  for (double w : larmor_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("Larmor frequencies must be positive and finite");
    }
  }
  if (!(coupling_ >= 0.0) || !std::isfinite(coupling_)) {
    throw std::invalid_argument("coupling J must be nonnegative and finite");
  }
  if (!(t2_ > 0.0) || !(t1_ > 0.0)) {
    throw std::invalid_argument("relaxation times must be positive");
  }
  secular_ok_ = std::abs(delta_omega()) > kSecularRatio * coupling_;
}

SpinSystem SpinSystem::from_offset(double reference, double delta, double coupling,
                                   double t2, double t1) {
  return SpinSystem({reference, reference + delta}, coupling, t2, t1);
}

SpinSystem SpinSystem::cytosine() {
  return from_offset(kTwoPi * 500.0e6, kTwoPi * 765.0, kTwoPi * 7.1, 1.0, 7.0);
}

SpinSystem SpinSystem::scaled_validation() {
  return from_offset(kTwoPi * 20.0e3, kTwoPi * 765.0, kTwoPi * 7.1, 1.0, 7.0);
}

double SpinSystem::t_j() const {
  if (coupling_ <= 0.0) throw std::domain_error("T_J undefined for J = 0");
  return kPi / coupling_;
}

// ---------------------------------------------------------------------------
// Envelope / channels / frames
// ---------------------------------------------------------------------------

Envelope::Envelope(Shape shape, double peak, double start, double width)
    : shape_(shape), peak_(peak), start_(start), width_(width) {
  if (!(peak_ >= 0.0) || !std::isfinite(peak_)) {
    throw std::invalid_argument("rf envelope amplitude must be nonnegative");
  }
  if (shape_ != Shape::Constant && !(width_ > 0.0)) {
    throw std::invalid_argument("rf envelope width must be positive");
  }
}

Envelope Envelope::constant(double amplitude) {
  return Envelope(Shape::Constant, amplitude, 0.0, 0.0);
}

Envelope Envelope::rectangular(double amplitude, double start, double width) {
  return Envelope(Shape::Rectangular, amplitude, start, width);
}

Envelope Envelope::gaussian(double peak, double start, double width) {
  return Envelope(Shape::Gaussian, peak, start, width);
}

double Envelope::operator()(double t) const {
  switch (shape_) {
    case Shape::Constant:
      return peak_;
    case Shape::Rectangular:
      return (t >= start_ && t <= start_ + width_) ? peak_ : 0.0;
    case Shape::Gaussian: {
      if (t < start_ || t > start_ + width_) return 0.0;
      const double sigma = width_ / 6.0;
      const double u = (t - start_ - 0.5 * width_) / sigma;
      return peak_ * std::exp(-0.5 * u * u);
    }
  }
  return 0.0;
}

void RfChannel::validate(const SpinSystem& sys) const {
  if (!(carrier > 0.0) || !std::isfinite(carrier)) {
    throw std::invalid_argument("rf carrier must be positive");
  }
  if (target < 0 || target >= sys.spin_count()) {
    throw std::out_of_range("rf channel target out of range");
  }
  if (!std::isfinite(phase)) throw std::invalid_argument("rf phase not finite");
}

FrameSpec FrameSpec::lab(int n_spins) {
  return FrameSpec{std::vector<double>(static_cast<size_t>(n_spins), 0.0)};
}

FrameSpec FrameSpec::co_rotating(const SpinSystem& sys) {
  return FrameSpec{sys.larmor()};
}

FrameSpec FrameSpec::common(const SpinSystem& sys) {
  return FrameSpec{std::vector<double>(sys.larmor().size(), sys.larmor(0))};
}

void FrameSpec::validate() const {
  for (double w : omega_rot) {
    if (!std::isfinite(w)) throw std::invalid_argument("frame velocity not finite");
  }
}

// ---------------------------------------------------------------------------
// HamiltonianModel
// ---------------------------------------------------------------------------

HamiltonianModel HamiltonianModel::lab_exact() {
  return {ModelVariant::LabExact, Frame::Lab};
}
HamiltonianModel HamiltonianModel::rotating_exact() {
  return {ModelVariant::RotatingExact, Frame::CoRotating};
}
HamiltonianModel HamiltonianModel::rotating_secular_hetero() {
  return {ModelVariant::RotatingSecularHetero, Frame::CoRotating};
}
HamiltonianModel HamiltonianModel::rotating_secular_homo() {
  return {ModelVariant::RotatingSecularHomo, Frame::CoRotating};
}
HamiltonianModel HamiltonianModel::common_rotating_exact() {
  return {ModelVariant::CommonRotatingExact, Frame::Common};
}
HamiltonianModel HamiltonianModel::falsification_conventional_offset() {
  return {ModelVariant::ConventionalOffset, Frame::CoRotating};
}
HamiltonianModel HamiltonianModel::falsification_conventional_lab() {
  return {ModelVariant::ConventionalLab, Frame::Lab};
}

HamiltonianModel HamiltonianModel::from_name(std::string_view name) {
  for (const auto& m :
       {lab_exact(), rotating_exact(), rotating_secular_hetero(),
        rotating_secular_homo(), common_rotating_exact(),
        falsification_conventional_offset(), falsification_conventional_lab()}) {
    if (m.name() == name) return m;
  }
  throw std::invalid_argument("unknown Hamiltonian model '" + std::string(name) + "'");
}

std::string_view HamiltonianModel::name() const {
  switch (variant_) {
    case ModelVariant::LabExact: return "lab-exact";
    case ModelVariant::RotatingExact: return "rotating-exact";
    case ModelVariant::RotatingSecularHetero: return "rotating-secular-hetero";
    case ModelVariant::RotatingSecularHomo: return "rotating-secular-homo";
    case ModelVariant::ConventionalOffset: return "conventional-offset";
    case ModelVariant::CommonRotatingExact: return "common-rotating-exact";
    case ModelVariant::ConventionalLab: return "conventional-lab";
  }
  return "?";
}

bool HamiltonianModel::is_conventional() const {
  return variant_ == ModelVariant::ConventionalOffset ||
         variant_ == ModelVariant::ConventionalLab;
}

FrameSpec HamiltonianModel::frame(const SpinSystem& sys) const {
  switch (frame_) {
    case Frame::Lab: return FrameSpec::lab(sys.spin_count());
    case Frame::CoRotating: return FrameSpec::co_rotating(sys);
    case Frame::Common: return FrameSpec::common(sys);
  }
  return FrameSpec::lab(sys.spin_count());
}

// ---------------------------------------------------------------------------
// TimeOperator
// ---------------------------------------------------------------------------

TimeOperator::TimeOperator(Fn fn, double max_frequency, bool is_static)
    : fn_(std::move(fn)), max_frequency_(max_frequency), is_static_(is_static) {
  if (!fn_) throw std::invalid_argument("empty time operator");
  if (!(max_frequency_ >= 0.0)) throw std::invalid_argument("negative max frequency");
}

TimeOperator TimeOperator::constant(ComplexMatrix h) {
  return TimeOperator([h = std::move(h)](double) { return h; }, 0.0, true);
}

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

ComplexMatrix h_lab(const SpinSystem& sys, const std::vector<RfChannel>& channels,
                    double t) {
  require_two_spins(sys);
  const Ops& o = ops();
  ComplexMatrix h = -sys.larmor(0) * o.iz[0] - sys.larmor(1) * o.iz[1] +
                    sys.coupling() * (o.ixx + o.iyy + o.izz);
  for (const RfChannel& ch : channels) {
    ch.validate(sys);
    const double drive =
        -2.0 * ch.amplitude(t) * std::cos(ch.carrier * t - ch.phase);
    const double w_target = sys.larmor(ch.target);
    for (int k = 0; k < 2; ++k) {
      h += drive * (sys.larmor(k) / w_target) * o.ix[k];
    }
  }
  return h;
}

TimeOperator lab_operator(const SpinSystem& sys, std::vector<RfChannel> channels) {
  double w_max = max_abs(sys.larmor()) + sys.coupling();
  for (const RfChannel& ch : channels) {
    ch.validate(sys);
    w_max = std::max(w_max, ch.carrier + sys.coupling());
  }
  const bool is_static = channels.empty();
  return TimeOperator(
      [sys, channels = std::move(channels)](double t) { return h_lab(sys, channels, t); },
      w_max, is_static);
}

TimeOperator to_rotating(TimeOperator lab, const FrameSpec& frame) {
  frame.validate();
  const std::vector<double> w = frame.omega_rot;
  const int n = static_cast<int>(w.size());
  const double w_max = lab.max_frequency() + max_abs(w);
  bool trivial = true;
  for (double x : w) trivial = trivial && x == 0.0;
  const bool is_static = lab.is_static() && trivial;
  return TimeOperator(
      [lab = std::move(lab), w, n](double t) {
        ComplexMatrix h = lab(t);
        const Eigen::Index dim = h.rows();
        if (spin_count(dim) != n) {
          throw std::invalid_argument("frame spin count does not match operator");
        }
        // U is diagonal with phase p_b = -t sum_k w_k m_k(b).
        Eigen::VectorXd p(dim);
        Eigen::VectorXd zeeman(dim);
        for (Eigen::Index b = 0; b < dim; ++b) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += w[static_cast<size_t>(k)] * m_of(b, k, n);
          p(b) = -t * s;
          zeeman(b) = s;
        }
        ComplexMatrix out(dim, dim);
        for (Eigen::Index a = 0; a < dim; ++a) {
          for (Eigen::Index b = 0; b < dim; ++b) {
            out(a, b) = std::polar(1.0, p(a) - p(b)) * h(a, b);
          }
        }
        // -i U dU^dagger/dt = +sum_k w_rot,k Iz_k
        for (Eigen::Index b = 0; b < dim; ++b) out(b, b) += zeeman(b);
        return out;
      },
      w_max, is_static);
}

ComplexMatrix h_rotating_system(const SpinSystem& sys, const FrameSpec& frame,
                                double t) {
  require_two_spins(sys);
  frame.validate();
  if (frame.omega_rot.size() != 2) throw std::invalid_argument("frame needs two spins");
  const Ops& o = ops();
  const double j = sys.coupling();
  const double dw_rot = frame.omega_rot[1] - frame.omega_rot[0];
  ComplexMatrix h = -(sys.larmor(0) - frame.omega_rot[0]) * o.iz[0] -
                    (sys.larmor(1) - frame.omega_rot[1]) * o.iz[1] + j * o.izz;
  h(1, 2) += 0.5 * j * std::polar(1.0, dw_rot * t);
  h(2, 1) += 0.5 * j * std::polar(1.0, -dw_rot * t);
  return h;
}

ComplexMatrix h_rotating_control(const SpinSystem& sys, const RfChannel& channel,
                                 const FrameSpec& frame, double t) {
  require_two_spins(sys);
  channel.validate(sys);
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  const double w1 = channel.amplitude(t);
  if (w1 == 0.0) return h;
  const double w_target = sys.larmor(channel.target);
  for (int k = 0; k < 2; ++k) {
    const double strength = w1 * sys.larmor(k) / w_target;
    const double phase =
        channel.phase - (channel.carrier - frame.omega_rot[static_cast<size_t>(k)]) * t;
    add_transverse(h, k, strength, phase);
  }
  return h;
}

ComplexMatrix h_secular_system(const SpinSystem& sys) {
  require_two_spins(sys);
  return sys.coupling() * ops().izz;
}

ComplexMatrix h_control_homo(const SpinSystem& sys, const RfChannel& channel,
                             double t) {
  channel.validate(sys);
  require_resonant(sys, channel);
  return h_rotating_control(sys, channel, FrameSpec::co_rotating(sys), t);
}

ComplexMatrix h_control_hetero(const SpinSystem& sys, const RfChannel& channel,
                               double t) {
  require_two_spins(sys);
  channel.validate(sys);
  require_resonant(sys, channel);
  ComplexMatrix h = ComplexMatrix::Zero(4, 4);
  add_transverse(h, channel.target, channel.amplitude(t), channel.phase);
  return h;
}

ComplexMatrix h_common_rotating_system(const SpinSystem& sys) {
  return h_rotating_system(sys, FrameSpec::common(sys), 0.0);
}

ComplexMatrix h_conventional(const SpinSystem& sys) {
  require_two_spins(sys);
  const Ops& o = ops();
  return -sys.delta_omega() * o.iz[1] + sys.coupling() * o.izz;
}

ComplexMatrix h_conventional_lab(const SpinSystem& sys) {
  require_two_spins(sys);
  const Ops& o = ops();
  return -sys.larmor(0) * o.iz[0] - sys.larmor(1) * o.iz[1] + sys.coupling() * o.izz;
}

TimeOperator model_operator(const HamiltonianModel& model, const SpinSystem& sys,
                            std::vector<RfChannel> channels) {
  require_two_spins(sys);
  for (const RfChannel& ch : channels) ch.validate(sys);
  const FrameSpec frame = model.frame(sys);
  const bool no_rf = channels.empty();

  // Fastest oscillation of the rf terms as seen in the model's frame.
  double w_rf = 0.0;
  for (const RfChannel& ch : channels) {
    for (int k = 0; k < 2; ++k) {
      w_rf = std::max(w_rf, std::abs(ch.carrier - frame.omega_rot[static_cast<size_t>(k)]));
    }
  }

  switch (model.variant()) {
    case ModelVariant::LabExact:
      return lab_operator(sys, std::move(channels));

    case ModelVariant::ConventionalLab: {
      double w_max = max_abs(sys.larmor()) + sys.coupling();
      for (const RfChannel& ch : channels) w_max = std::max(w_max, ch.carrier + sys.coupling());
      return TimeOperator(
          [sys, channels = std::move(channels)](double t) {
            ComplexMatrix h = h_conventional_lab(sys);
            ComplexMatrix rf = h_lab(sys, channels, t);
            return ComplexMatrix(h + rf - h_lab(sys, {}, t));
          },
          w_max, no_rf);
    }

    case ModelVariant::RotatingExact:
    case ModelVariant::CommonRotatingExact: {
      const double dw_rot = std::abs(frame.omega_rot[1] - frame.omega_rot[0]);
      const double w_max = std::max(w_rf, sys.coupling() > 0.0 ? dw_rot : 0.0);
      const bool is_static = no_rf && (sys.coupling() == 0.0 || dw_rot == 0.0);
      return TimeOperator(
          [sys, frame, channels = std::move(channels)](double t) {
            ComplexMatrix h = h_rotating_system(sys, frame, t);
            for (const RfChannel& ch : channels) h += h_rotating_control(sys, ch, frame, t);
            return h;
          },
          w_max, is_static);
    }

    case ModelVariant::RotatingSecularHomo:
    case ModelVariant::ConventionalOffset: {
      for (const RfChannel& ch : channels) require_resonant(sys, ch);
      const ComplexMatrix h0 = model.variant() == ModelVariant::ConventionalOffset
                                   ? h_conventional(sys)
                                   : h_secular_system(sys);
      if (no_rf) return TimeOperator::constant(h0);
      return TimeOperator(
          [sys, h0, channels = std::move(channels)](double t) {
            ComplexMatrix h = h0;
            for (const RfChannel& ch : channels) h += h_control_homo(sys, ch, t);
            return h;
          },
          w_rf, false);
    }

    case ModelVariant::RotatingSecularHetero: {
      for (const RfChannel& ch : channels) require_resonant(sys, ch);
      const ComplexMatrix h0 = h_secular_system(sys);
      if (no_rf) return TimeOperator::constant(h0);
      return TimeOperator(
          [sys, h0, channels = std::move(channels)](double t) {
            ComplexMatrix h = h0;
            for (const RfChannel& ch : channels) h += h_control_hetero(sys, ch, t);
            return h;
          },
          0.0, false);
    }
  }
  throw std::logic_error("unhandled model variant");
}

ComplexMatrix time_average(const TimeOperator& op, double t0, double window,
                           int intervals) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw std::invalid_argument("Simpson quadrature needs an even interval count");
  }
  if (!(window > 0.0)) throw std::invalid_argument("averaging window must be positive");
  const double h = window / intervals;
  ComplexMatrix acc = op(t0) + op(t0 + window);
  for (int k = 1; k < intervals; ++k) {
    acc += (k % 2 == 1 ? 4.0 : 2.0) * op(t0 + k * h);
  }
  return acc * (h / 3.0) / window;
}

}  // namespace homonmr
