#include "f1b/constructions.hpp"

#include <cmath>
#include <sstream>

namespace f1b {

namespace {

GruGate zero_gate(int K) {
  return {Eigen::MatrixXd::Zero(K, 2), Eigen::MatrixXd::Zero(K, K),
          Eigen::VectorXd::Zero(K)};
}

LstmGate zero_lstm_gate(int K) {
  return {Eigen::MatrixXd::Zero(K, 2), Eigen::MatrixXd::Zero(K, K),
          Eigen::MatrixXd::Zero(K, K), Eigen::VectorXd::Zero(K)};
}

void require_open_unit(double A) {
  if (!(A > 0.0 && A < 1.0)) {
    std::ostringstream msg;
    msg << "gate constant A = " << A << " must lie strictly inside (0,1)";
    throw ConstraintError("A in (0,1)", msg.str());
  }
}

LinearClassifier threshold_at_zero(int K) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(K);
  beta[0] = 1.0;
  return {beta, 0.0};
}

}  // namespace

double GruK1Construction::gate_constant() const { return sigmoid(a); }
double GruK1Construction::input_constant() const { return std::tanh(b); }

GruParams gru_k1_params(const GruK1Construction& c) {
  require_open_unit(c.gate_constant());
  GruParams p;
  p.K = 1;
  p.reset = zero_gate(1);
  p.update = zero_gate(1);
  p.update.W(0, 1) = c.a;
  p.candidate = zero_gate(1);
  p.candidate.W(0, 0) = c.b;
  return p;
}

PruParams pru_k1_params(const GruK1Construction& c) {
  require_open_unit(c.gate_constant());
  PruParams p;
  p.K = 1;
  p.update = zero_gate(1);
  p.update.W(0, 1) = c.a;
  p.candidate = zero_gate(1);
  p.candidate.W(0, 0) = c.b;
  return p;
}

LstmParams lstm_k1_params(const GruK1Construction& c) {
  require_open_unit(c.gate_constant());
  LstmParams p;
  p.K = 1;
  p.input = zero_lstm_gate(1);
  p.forget = zero_lstm_gate(1);
  p.output = zero_lstm_gate(1);
  p.candidate = zero_lstm_gate(1);
  p.input.W(0, 1) = c.a;
  p.forget.W(0, 1) = -c.a;
  p.candidate.W(0, 0) = c.b;
  return p;
}

double choose_a(int n, double margin) {
  if (n < 1) throw std::invalid_argument("choose_a: n must be positive");
  if (!(margin > 0.0 && margin < 1.0)) {
    throw std::invalid_argument("choose_a: margin must lie in (0,1); 2A^n-1 < 1 for all finite a");
  }
  // Solve 2 A^n - 1 = margin for A, invert the sigmoid, then snap up to the
  // 1e-6 grid (nudging further if rounding left the target unmet).
  const double A_min = std::pow((1.0 + margin) / 2.0, 1.0 / n);
  const double exact = std::log(A_min / (1.0 - A_min));
  constexpr double kGrid = 1e-6;
  double a = std::ceil(exact / kGrid) * kGrid;
  while (2.0 * std::pow(sigmoid(a), n) - 1.0 < margin) a += kGrid;
  return a;
}

ModelSystem gru_k1_system(const GruK1Construction& c) {
  GruParams p = gru_k1_params(c);
  return {p, zero_state(p), FlagEncoding::Symmetric, threshold_at_zero(1)};
}

ModelSystem pru_k1_system(const GruK1Construction& c) {
  PruParams p = pru_k1_params(c);
  return {p, zero_state(p), FlagEncoding::Symmetric, threshold_at_zero(1)};
}

ModelSystem lstm_k1_system(const GruK1Construction& c) {
  LstmParams p = lstm_k1_params(c);
  return {p, zero_state(p), FlagEncoding::Symmetric, threshold_at_zero(1)};
}

void VanillaK2Construction::validate() const {
  std::ostringstream msg;
  if (!(w21 > 0.0 && w21 < 1.0)) {
    msg << "w21 = " << w21;
    throw ConstraintError("w21 in (0,1)", msg.str());
  }
  if (!(b2 < 0.0)) {
    msg << "b2 = " << b2;
    throw ConstraintError("b2 < 0", msg.str());
  }
  if (!(w21 + b2 < -1.0)) {
    msg << "w21 + b2 = " << (w21 + b2);
    throw ConstraintError("w21*x + b2 < -1 for x in {-1,+1}", msg.str());
  }
  if (b1 == 0.0) {
    throw ConstraintError("b1 != 0", "b1 = 0");
  }
  const double mix_hi = b1 + b1 * w21;
  const double mix_lo = b1 - b1 * w21;
  if (!(mix_hi > -1.0 && mix_hi < 1.0 && mix_lo > -1.0 && mix_lo < 1.0)) {
    msg << "b1*(1+w21) = " << mix_hi << ", b1*(1-w21) = " << mix_lo;
    throw ConstraintError("b1 +- b1*w21 in (-1,1)", msg.str());
  }
}

ModelSystem VanillaK2System::as_system() const {
  return {params, s0, encoding, classifier};
}

VanillaK2System vanilla_k2_params(const VanillaK2Construction& c) {
  c.validate();
  VanillaK2System sys;
  sys.params.K = 2;
  sys.params.activation = Activation::PiecewiseLinearG;
  sys.params.U = Eigen::MatrixXd::Zero(2, 2);
  sys.params.U(0, 0) = 1.0;
  sys.params.U(0, 1) = c.b1;
  sys.params.W = Eigen::MatrixXd::Zero(2, 2);
  sys.params.W(1, 0) = c.w21;
  sys.params.W(1, 1) = -c.b2;
  sys.params.b = Eigen::VectorXd(2);
  sys.params.b << c.b1, c.b2;
  sys.s0.s = Eigen::VectorXd(2);
  sys.s0.s << 0.0, -1.0;
  sys.encoding = FlagEncoding::Binary;
  // For b1 > 0 the direction (1, b1) scores b1*w21 on every positive final
  // and -b1*w21 on every negative one; b1 < 0 flips the sign, so flip beta.
  sys.classifier.beta = Eigen::VectorXd(2);
  sys.classifier.beta << 1.0, c.b1;
  if (c.b1 < 0.0) sys.classifier.beta = -sys.classifier.beta;
  sys.classifier.gamma = 0.0;
  return sys;
}

const char* mechanism_name(Mechanism m) noexcept {
  switch (m) {
    case Mechanism::LoadEmptying: return "load-emptying";
    case Mechanism::FeatureLoading: return "feature-loading";
    case Mechanism::Memorization: return "memorization";
    case Mechanism::StateMixing: return "state-mixing";
  }
  return "?";
}

std::vector<Mechanism> mechanism_of(const VanillaK2Construction& c,
                                    const CellState& prev, const InputVector& x) {
  c.validate();
  if (prev.s.size() != 2) {
    throw std::invalid_argument("mechanism_of: state must be 2-dimensional");
  }
  std::vector<Mechanism> active;
  if (x.x_flag == 0.0) {
    active.push_back(Mechanism::LoadEmptying);
  } else if (x.x_flag == 1.0) {
    active.push_back(Mechanism::FeatureLoading);
  }
  const double s1 = prev.s[0];
  const double s2 = prev.s[1];
  const double h = s1 + c.b1 * s2 + c.b1;
  if (s1 > -1.0 && s1 < 1.0 && s2 == -1.0) {
    active.push_back(Mechanism::Memorization);
  }
  if (h > -1.0 && h < 1.0 && s2 > -1.0) {
    active.push_back(Mechanism::StateMixing);
  }
  return active;
}

namespace {

Eigen::MatrixXd pad(const Eigen::MatrixXd& m, int rows, int cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

Eigen::VectorXd pad(const Eigen::VectorXd& v, int size) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
  out.head(v.size()) = v;
  return out;
}

GruGate lift_gate(const GruGate& gate, int K) {
  return {pad(gate.W, K + 1, 2), pad(gate.U, K + 1, K + 1), pad(gate.b, K + 1)};
}

LstmGate lift_gate(const LstmGate& gate, int K) {
  return {pad(gate.W, K + 1, 2), pad(gate.U, K + 1, K + 1), pad(gate.V, K + 1, K + 1),
          pad(gate.b, K + 1)};
}

}  // namespace

VanillaParams lift(const VanillaParams& p) {
  VanillaParams out;
  out.K = p.K + 1;
  out.W = pad(p.W, out.K, 2);
  out.U = pad(p.U, out.K, out.K);
  out.b = pad(p.b, out.K);
  out.activation = p.activation;
  return out;
}

LstmParams lift(const LstmParams& p) {
  LstmParams out;
  out.K = p.K + 1;
  out.input = lift_gate(p.input, p.K);
  out.forget = lift_gate(p.forget, p.K);
  out.output = lift_gate(p.output, p.K);
  out.candidate = lift_gate(p.candidate, p.K);
  return out;
}

GruParams lift(const GruParams& p) {
  GruParams out;
  out.K = p.K + 1;
  out.reset = lift_gate(p.reset, p.K);
  out.update = lift_gate(p.update, p.K);
  out.candidate = lift_gate(p.candidate, p.K);
  return out;
}

PruParams lift(const PruParams& p) {
  PruParams out;
  out.K = p.K + 1;
  out.update = lift_gate(p.update, p.K);
  out.candidate = lift_gate(p.candidate, p.K);
  return out;
}

std::pair<AnyParams, CellState> lift(const AnyParams& params, const CellState& s0) {
  AnyParams lifted = std::visit([](const auto& p) -> AnyParams { return lift(p); }, params);
  CellState s0_lifted;
  s0_lifted.s = pad(s0.s, static_cast<int>(s0.s.size()) + 1);
  if (s0.d.size() > 0) s0_lifted.d = pad(s0.d, static_cast<int>(s0.d.size()) + 1);
  return {std::move(lifted), std::move(s0_lifted)};
}

}  // namespace f1b
