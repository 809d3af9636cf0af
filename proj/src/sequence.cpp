#include "homonmr/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace homonmr {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Token {
  enum Kind { Ident, Number, Slash, Minus, Colon, Semi, End } kind;
  std::string text;
  double value = 0.0;
  int col = 0;  // 1-based
};

class Lexer {
 public:
  Lexer(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s_.size()) {
      const char c = s_[i];
      const int col = static_cast<int>(i) + 1;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) {
          // A digit-led suffix never starts an identifier, but "s1"/"s2" need digits.
          ++j;
        }
        out.push_back({Token::Ident, std::string(s_.substr(i, j - i)), 0.0, col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        size_t j = i;
        while (j < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[j])) || s_[j] == '.')) ++j;
        if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
          size_t k = j + 1;
          if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
          if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
            j = k;
            while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
          }
        }
        const std::string text(s_.substr(i, j - i));
        double v = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
          throw ParseError(line_, col, "malformed number '" + text + "'");
        }
        out.push_back({Token::Number, text, v, col});
        i = j;
      } else if (c == '/') {
        out.push_back({Token::Slash, "/", 0.0, col});
        ++i;
      } else if (c == '-') {
        out.push_back({Token::Minus, "-", 0.0, col});
        ++i;
      } else if (c == ':') {
        out.push_back({Token::Colon, ":", 0.0, col});
        ++i;
      } else if (c == ';') {
        out.push_back({Token::Semi, ";", 0.0, col});
        ++i;
      } else {
        throw ParseError(line_, col, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Token::End, "", 0.0, static_cast<int>(s_.size()) + 1});
    return out;
  }

 private:
  std::string_view s_;
  int line_;
};

double unit_scale(const std::string& unit) {
  if (unit == "s") return 1.0;
  if (unit == "ms") return 1e-3;
  if (unit == "us") return 1e-6;
  return 0.0;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

enum class TrackName { S1, S2, Both, Readout };

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line) : t_(std::move(toks)), line_(line) {}

  const Token& peek() const { return t_[pos_]; }
  const Token& next() { return t_[pos_++]; }
  bool at(Token::Kind k) const { return peek().kind == k; }
  bool at_ident(std::string_view s) const { return at(Token::Ident) && peek().text == s; }

  [[noreturn]] void fail(const Token& tok, const std::string& msg) const {
    throw ParseError(line_, tok.col, msg);
  }

  const Token& expect(Token::Kind k, const char* what) {
    if (!at(k)) fail(peek(), std::string("expected ") + what);
    return next();
  }

  int positive_int(const char* what) {
    const Token& tok = expect(Token::Number, what);
    const double v = tok.value;
    if (v < 1.0 || v != std::floor(v) || v > 1e6) fail(tok, std::string(what) + " must be a positive integer");
    return static_cast<int>(v);
  }

  TrackName track() {
    const Token& tok = expect(Token::Ident, "track name (s1, s2, both, readout)");
    if (tok.text == "s1") return TrackName::S1;
    if (tok.text == "s2") return TrackName::S2;
    if (tok.text == "both") return TrackName::Both;
    if (tok.text == "readout") return TrackName::Readout;
    fail(tok, "unknown track '" + tok.text + "'");
  }

  PulseAxis axis() {
    const Token& first = peek();
    bool negative = false;
    if (at(Token::Minus)) {
      next();
      negative = true;
    }
    if (!at(Token::Ident)) fail(first, "expected axis (x, y, -x, -y)");
    const Token& tok = next();
    if (tok.text == "x") return negative ? PulseAxis::MinusX : PulseAxis::X;
    if (tok.text == "y") return negative ? PulseAxis::MinusY : PulseAxis::Y;
    fail(first, "unknown axis '" + std::string(negative ? "-" : "") + tok.text + "'");
  }

  double positive_number(const char* what) {
    const Token& tok = expect(Token::Number, what);
    if (!(tok.value > 0.0) || !std::isfinite(tok.value)) fail(tok, std::string(what) + " must be positive");
    return tok.value;
  }

  Pulse pulse() {
    Pulse p;
    if (at(Token::Slash)) {
      next();
      p.divisor = positive_int("flip-angle divisor");
    }
    p.axis = axis();
    while (at(Token::Ident)) {
      const Token& kw = next();
      if (kw.text == "width") {
        if (p.width) fail(kw, "duplicate width");
        double w = positive_number("pulse width");
        double scale = 1e-3;
        if (at(Token::Ident) && unit_scale(peek().text) > 0.0) scale = unit_scale(next().text);
        p.width = w * scale;
      } else if (kw.text == "carrier") {
        if (p.carrier) fail(kw, "duplicate carrier");
        p.carrier = positive_number("carrier");
        const Token& u = peek();
        if (!(at_ident("rad"))) fail(u, "carrier needs unit rad/s");
        next();
        expect(Token::Slash, "'/' in rad/s");
        if (!at_ident("s")) fail(peek(), "carrier needs unit rad/s");
        next();
      } else {
        fail(kw, "unexpected '" + kw.text + "' after pulse");
      }
    }
    return p;
  }

  Delay delay() {
    const Token& num = expect(Token::Number, "delay duration");
    if (at(Token::Slash)) {
      if (num.value != 1.0) fail(num, "symbolic delay must read 1/nJ");
      next();
      const int n = positive_int("J divisor");
      if (!at_ident("J")) fail(peek(), "expected 'J' after 1/n");
      next();
      return Delay::per_j(n);
    }
    if (!(num.value > 0.0)) fail(num, "delay must be positive");
    if (!at(Token::Ident)) fail(peek(), "delay needs a unit (s, ms, us) or 1/nJ form");
    const Token& u = next();
    const double scale = unit_scale(u.text);
    if (scale == 0.0) fail(u, "unknown time unit '" + u.text + "'");
    return Delay::literal(num.value * scale);
  }

  Item item() {
    const Token& tok = expect(Token::Ident, "item (pi, delay, fg, nop)");
    if (tok.text == "pi") return pulse();
    if (tok.text == "delay") return delay();
    if (tok.text == "nop") return Nop{};
    if (tok.text == "fg") {
      Gradient g;
      if (at(Token::Number)) {
        const Token& n = peek();
        g.n_slices = positive_int("gradient slices");
        if (g.n_slices < 16) fail(n, "gradient needs at least 16 slices");
      }
      return g;
    }
    fail(tok, "unknown item '" + tok.text + "'");
  }

  size_t pos_ = 0;
  std::vector<Token> t_;
  int line_;
};

// Duration kinds used for the simultaneity check.
struct Span {
  enum Kind { None, Instant, Seconds, PerJ } kind = None;
  double value = 0.0;
};

Span span_of(const Item& it) {
  if (const auto* p = std::get_if<Pulse>(&it)) {
    return p->width ? Span{Span::Seconds, *p->width} : Span{Span::Instant, 0.0};
  }
  if (const auto* d = std::get_if<Delay>(&it)) {
    return d->seconds ? Span{Span::Seconds, *d->seconds} : Span{Span::PerJ, double(d->j_divisor)};
  }
  return {};
}

bool spans_compatible(const Item& a, const Item& b) {
  const Span x = span_of(a);
  const Span y = span_of(b);
  if (x.kind == Span::None || y.kind == Span::None) return true;
  // Simultaneous pulses may have different widths; they are centred.
  if (std::holds_alternative<Pulse>(a) && std::holds_alternative<Pulse>(b)) return true;
  if (x.kind != y.kind) return false;
  if (x.kind == Span::PerJ) return x.value == y.value;
  return std::abs(x.value - y.value) <= 1e-12 * std::max(x.value, y.value);
}

std::string item_text(const Item& it) {
  if (std::holds_alternative<Nop>(it)) return "nop";
  if (const auto* g = std::get_if<Gradient>(&it)) {
    return g->n_slices == Gradient{}.n_slices ? "fg" : "fg " + std::to_string(g->n_slices);
  }
  if (const auto* d = std::get_if<Delay>(&it)) {
    return d->is_symbolic() ? "delay 1/" + std::to_string(d->j_divisor) + "J"
                            : "delay " + fmt(*d->seconds) + " s";
  }
  const auto& p = std::get<Pulse>(it);
  std::string s = p.divisor == 1 ? "pi" : "pi/" + std::to_string(p.divisor);
  s += " ";
  s += axis_token(p.axis);
  if (p.width) s += " width " + fmt(*p.width) + " s";
  if (p.carrier) s += " carrier " + fmt(*p.carrier) + " rad/s";
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Small types
// ---------------------------------------------------------------------------

double axis_phase(PulseAxis axis) {
  switch (axis) {
    case PulseAxis::X: return 0.0;
    case PulseAxis::Y: return kPi / 2.0;
    case PulseAxis::MinusX: return kPi;
    case PulseAxis::MinusY: return 1.5 * kPi;
  }
  return 0.0;
}

std::string_view axis_token(PulseAxis axis) {
  switch (axis) {
    case PulseAxis::X: return "x";
    case PulseAxis::Y: return "y";
    case PulseAxis::MinusX: return "-x";
    case PulseAxis::MinusY: return "-y";
  }
  return "?";
}

Delay Delay::literal(double seconds) {
  if (!(seconds > 0.0) || !std::isfinite(seconds)) {
    throw std::invalid_argument("delay must be positive");
  }
  return Delay{seconds, 0};
}

Delay Delay::per_j(int n) {
  if (n < 1) throw std::invalid_argument("J divisor must be positive");
  return Delay{std::nullopt, n};
}

std::string Delay::label() const {
  return is_symbolic() ? "1/" + std::to_string(j_divisor) + "J" : fmt(*seconds) + " s";
}

const Item& Column::track(int spin) const {
  if (joint) return both;
  if (spin == 0) return s1;
  if (spin == 1) return s2;
  throw std::out_of_range("column track out of range");
}

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Parse / print
// ---------------------------------------------------------------------------

Sequence parse_sequence(std::string_view text) {
  Sequence seq;
  seq.source = std::string(text);
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    LineParser p(Lexer(line, line_no).run(), line_no);
    if (p.at(Token::End)) {
      if (end == text.size()) break;
      continue;
    }

    std::optional<Item> s1, s2, both;
    bool saw_readout = false;
    const Token first = p.peek();
    for (;;) {
      const Token track_tok = p.peek();
      const TrackName name = p.track();
      p.expect(Token::Colon, "':' after track name");
      const Token item_tok = p.peek();
      if (name == TrackName::Readout) {
        if (!p.at_ident("pi")) p.fail(item_tok, "readout must be a pi/2 pulse");
        p.next();
        Pulse r = p.pulse();
        if (r.divisor != 2 || r.width || r.carrier) p.fail(item_tok, "readout must be a hard pi/2 pulse");
        if (saw_readout || seq.readout) p.fail(track_tok, "duplicate readout");
        saw_readout = true;
        seq.readout = r.axis;
      } else {
        Item it = p.item();
        std::optional<Item>& slot =
            name == TrackName::S1 ? s1 : name == TrackName::S2 ? s2 : both;
        if (slot) p.fail(track_tok, "track '" + track_tok.text + "' given twice");
        slot = std::move(it);
      }
      if (p.at(Token::Semi)) {
        p.next();
        continue;
      }
      if (!p.at(Token::End)) p.fail(p.peek(), "expected ';' or end of line");
      break;
    }

    if (saw_readout) {
      if (s1 || s2 || both) p.fail(first, "readout must stand on its own line");
      if (end == text.size()) break;
      continue;
    }
    if (both && (s1 || s2)) p.fail(first, "'both' cannot be combined with s1/s2");

    Column col;
    if (both) {
      col.joint = true;
      col.both = *both;
    } else {
      col.s1 = s1.value_or(Nop{});
      col.s2 = s2.value_or(Nop{});
      const bool g1 = std::holds_alternative<Gradient>(col.s1);
      const bool g2 = std::holds_alternative<Gradient>(col.s2);
      if (g1 || g2) {
        const Item& other = g1 ? col.s2 : col.s1;
        if (!std::holds_alternative<Nop>(other) && !(g1 && g2 && col.s1 == col.s2)) {
          p.fail(first, "a field gradient acts on both spins; the other track must be fg or nop");
        }
        col = Column{true, g1 ? col.s1 : col.s2, Nop{}, Nop{}};
      } else if (!spans_compatible(col.s1, col.s2)) {
        p.fail(first, "unequal track durations in column");
      }
    }
    seq.columns.push_back(std::move(col));
    if (end == text.size()) break;
  }
  return seq;
}

std::string print_sequence(const Sequence& seq) {
  std::ostringstream out;
  if (!seq.name.empty()) out << "# " << seq.name << '\n';
  for (const Column& c : seq.columns) {
    if (c.joint) {
      out << "both: " << item_text(c.both) << '\n';
    } else {
      out << "s1: " << item_text(c.s1) << " ; s2: " << item_text(c.s2) << '\n';
    }
  }
  if (seq.readout) out << "readout: pi/2 " << axis_token(*seq.readout) << '\n';
  return out.str();
}

double parse_duration(std::string_view text) {
  LineParser p(Lexer(text, 1).run(), 1);
  const double v = p.positive_number("duration");
  double scale = 1.0;
  if (p.at(Token::Ident)) {
    const Token& u = p.next();
    scale = unit_scale(u.text);
    if (scale == 0.0) p.fail(u, "unknown time unit '" + u.text + "'");
  }
  if (!p.at(Token::End)) p.fail(p.peek(), "trailing input after duration");
  return v * scale;
}

// ---------------------------------------------------------------------------
// Durations
// ---------------------------------------------------------------------------

double resolve_delay(const Delay& d, const SpinSystem& sys, std::optional<double> t_j) {
  if (d.seconds) return *d.seconds;
  if (t_j) return 2.0 * *t_j / d.j_divisor;
  if (!(sys.coupling() > 0.0)) throw std::domain_error("symbolic delay needs J > 0");
  return kTwoPi / (d.j_divisor * sys.coupling());
}

double column_duration(const Column& col, const SpinSystem& sys, std::optional<double> t_j) {
  double d = 0.0;
  auto visit = [&](const Item& it) {
    if (const auto* p = std::get_if<Pulse>(&it)) {
      if (p->width) d = std::max(d, *p->width);
    } else if (const auto* dl = std::get_if<Delay>(&it)) {
      d = std::max(d, resolve_delay(*dl, sys, t_j));
    }
  };
  if (col.joint) {
    visit(col.both);
  } else {
    visit(col.s1);
    visit(col.s2);
  }
  return d;
}

double total_duration(const Sequence& seq, const SpinSystem& sys, std::optional<double> t_j) {
  double t = 0.0;
  for (const Column& c : seq.columns) t += column_duration(c, sys, t_j);
  return t;
}

// ---------------------------------------------------------------------------
// Soft pulses
// ---------------------------------------------------------------------------

GaussianEnvelope GaussianEnvelope::calibrated(double flip, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("Gaussian width must be positive");
  if (!(flip > 0.0)) throw std::invalid_argument("flip angle must be positive");
  const double sigma = width / 6.0;
  const double area_per_peak = sigma * std::sqrt(kTwoPi) * std::erf(3.0 / std::sqrt(2.0));
  return {width, flip / area_per_peak};
}

double GaussianEnvelope::operator()(double u) const {
  if (u < 0.0 || u > width) return 0.0;
  const double x = (u - 0.5 * width) / sigma();
  return peak * std::exp(-0.5 * x * x);
}

double GaussianEnvelope::integrate(int intervals) const {
  if (intervals < 2 || intervals % 2) throw std::invalid_argument("Simpson needs an even count");
  const double h = width / intervals;
  double acc = (*this)(0.0) + (*this)(width);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * (*this)(k * h);
  return acc * h / 3.0;
}

SoftWindow soft_window(const SpinSystem& sys) {
  const double dw = std::abs(sys.delta_omega());
  return {kTwoPi / dw, sys.coupling() > 0.0 ? (kTwoPi / sys.coupling()) / 10.0
                                            : std::numeric_limits<double>::infinity()};
}

namespace {

void check_tau(double tau, const SoftWindow& w, int spin) {
  const std::string who = "tau for spin " + std::to_string(spin + 1) + " = " + fmt(tau * 1e3) + " ms";
  if (!(tau > w.lower)) {
    throw std::invalid_argument(who + " violates the lower bound 2*pi/|dw0| = " +
                                fmt(w.lower * 1e3) + " ms");
  }
  if (!(tau < w.upper)) {
    throw std::invalid_argument(who + " violates the upper bound (2*pi/J)/10 = " +
                                fmt(w.upper * 1e3) + " ms");
  }
}

}  // namespace

Sequence translate_hard_to_soft(const Sequence& seq, double tau, const SpinSystem& sys) {
  return translate_hard_to_soft(seq, tau, tau, sys);
}

Sequence translate_hard_to_soft(const Sequence& seq, double tau1, double tau2,
                                const SpinSystem& sys) {
  const SoftWindow w = soft_window(sys);
  check_tau(tau1, w, 0);
  check_tau(tau2, w, 1);
  const double taus[2] = {tau1, tau2};
  Sequence out = seq;
  for (Column& c : out.columns) {
    if (c.joint) continue;
    for (int k = 0; k < 2; ++k) {
      Item& it = k == 0 ? c.s1 : c.s2;
      if (auto* p = std::get_if<Pulse>(&it); p && !p->width) {
        p->width = taus[k];
        p->carrier = sys.larmor(k);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

DjFunction dj_function_from_name(std::string_view name) {
  if (name == "f1") return DjFunction::F1;
  if (name == "f2") return DjFunction::F2;
  if (name == "f3") return DjFunction::F3;
  if (name == "f4") return DjFunction::F4;
  throw std::invalid_argument("unknown DJ function '" + std::string(name) + "' (f1..f4)");
}

namespace {

Item hard(int divisor, PulseAxis axis) { return Pulse{divisor, axis, std::nullopt, std::nullopt}; }

Column pair(Item a, Item b) { return Column{false, Nop{}, std::move(a), std::move(b)}; }
Column joint(Item a) { return Column{true, std::move(a), Nop{}, Nop{}}; }

}  // namespace

Sequence build_dj(DjFunction f) {
  using A = PulseAxis;
  Sequence s;
  s.name = "dj f" + std::to_string(static_cast<int>(f));
  s.readout = A::X;
  auto& c = s.columns;
  c.push_back(pair(hard(2, A::Y), hard(2, A::MinusY)));
  if (f == DjFunction::F1 || f == DjFunction::F2) {
    c.push_back(pair(Nop{}, Nop{}));
    c.push_back(joint(Delay::per_j(4)));
    c.push_back(pair(Nop{}, hard(1, A::X)));
    c.push_back(joint(Delay::per_j(4)));
    c.push_back(pair(Nop{}, f == DjFunction::F1 ? hard(1, A::X) : Item{Nop{}}));
    c.push_back(pair(hard(2, A::MinusY), hard(2, A::Y)));
  } else {
    c.push_back(pair(Nop{}, hard(2, A::Y)));
    c.push_back(joint(Delay::per_j(2)));
    c.push_back(pair(hard(2, A::MinusY), hard(2, A::MinusY)));
    c.push_back(pair(hard(2, A::MinusX), hard(2, f == DjFunction::F3 ? A::X : A::MinusX)));
    c.push_back(pair(hard(2, A::Y), Nop{}));
    c.push_back(pair(hard(2, A::MinusY), hard(2, A::Y)));
  }
  s.source = print_sequence(s);
  return s;
}

Sequence build_pps(bool compensate) {
  using A = PulseAxis;
  Sequence s;
  s.name = compensate ? "pps compensated" : "pps";
  s.readout = A::X;
  auto& c = s.columns;
  c.push_back(pair(Nop{}, hard(3, A::X)));
  c.push_back(joint(Gradient{}));
  c.push_back(pair(hard(4, A::X), Nop{}));
  if (compensate) {
    c.push_back(joint(Delay::per_j(4)));
    c.push_back(joint(hard(1, A::X)));
    c.push_back(joint(Delay::per_j(4)));
    c.push_back(joint(hard(1, A::X)));
  } else {
    c.push_back(joint(Delay::per_j(2)));
  }
  c.push_back(pair(hard(4, A::MinusY), Nop{}));
  c.push_back(joint(Gradient{}));
  s.source = print_sequence(s);
  return s;
}

}  // namespace homonmr
