#include "f1b/cells.hpp"

#include <cmath>
#include <stdexcept>

namespace f1b {

double g_activation(double x) noexcept {
  if (x < -1.0) return -1.0;
  if (x > 1.0) return 1.0;
  return x;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_activation(Activation act, double x) noexcept {
  return act == Activation::Tanh ? std::tanh(x) : g_activation(x);
}

namespace {

Eigen::Vector2d as_vec(const InputVector& x) { return {x.x_info, x.x_flag}; }

void check_shape(const char* who, int K, const Eigen::MatrixXd& W,
                 const Eigen::MatrixXd& U, const Eigen::VectorXd& b) {
  if (K < 1 || W.rows() != K || W.cols() != 2 || U.rows() != K || U.cols() != K ||
      b.size() != K) {
    throw std::invalid_argument(std::string(who) + ": parameter shapes inconsistent with K");
  }
}

void check_state(const char* who, int K, const Eigen::VectorXd& s) {
  if (s.size() != K) {
    throw std::invalid_argument(std::string(who) + ": state dimension mismatch");
  }
}

// Elementwise activations go through libm scalar calls so results do not
// depend on Eigen's packet math.
Eigen::VectorXd map_tanh(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Eigen::VectorXd map_sigmoid(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

}  // namespace

CellState zero_state(const VanillaParams& p) {
  return {Eigen::VectorXd::Zero(p.K), Eigen::VectorXd()};
}
CellState zero_state(const LstmParams& p) {
  return {Eigen::VectorXd::Zero(p.K), Eigen::VectorXd::Zero(p.K)};
}
CellState zero_state(const GruParams& p) {
  return {Eigen::VectorXd::Zero(p.K), Eigen::VectorXd()};
}
CellState zero_state(const PruParams& p) {
  return {Eigen::VectorXd::Zero(p.K), Eigen::VectorXd()};
}

CellState step(const VanillaParams& p, const CellState& state, const InputVector& x,
               GateRecord* record) {
  check_shape("vanilla step", p.K, p.W, p.U, p.b);
  check_state("vanilla step", p.K, state.s);
  const Eigen::VectorXd pre = p.W * as_vec(x) + p.U * state.s + p.b;
  Eigen::VectorXd next(p.K);
  for (int i = 0; i < p.K; ++i) next[i] = apply_activation(p.activation, pre[i]);
  if (record) record->pre = pre;
  return {std::move(next), Eigen::VectorXd()};
}

CellState step(const LstmParams& p, const CellState& state, const InputVector& x,
               GateRecord* record) {
  for (const auto* gate : {&p.input, &p.forget, &p.output, &p.candidate}) {
    check_shape("lstm step", p.K, gate->W, gate->U, gate->b);
    if (gate->V.rows() != p.K || gate->V.cols() != p.K) {
      throw std::invalid_argument("lstm step: peephole shape inconsistent with K");
    }
  }
  check_state("lstm step", p.K, state.s);
  check_state("lstm step", p.K, state.d);

  const Eigen::Vector2d xv = as_vec(x);
  const Eigen::VectorXd& c_prev = state.s;
  const Eigen::VectorXd& d_prev = state.d;
  auto gate_pre = [&](const LstmGate& gate) -> Eigen::VectorXd {
    return gate.W * xv + gate.U * d_prev + gate.V * c_prev + gate.b;
  };

  const Eigen::VectorXd i_t = map_sigmoid(gate_pre(p.input));
  const Eigen::VectorXd f_t = map_sigmoid(gate_pre(p.forget));
  const Eigen::VectorXd o_t = map_sigmoid(gate_pre(p.output));
  const Eigen::VectorXd c_tilde = map_tanh(gate_pre(p.candidate));

  Eigen::VectorXd c_next = i_t.cwiseProduct(c_tilde) + f_t.cwiseProduct(c_prev);
  Eigen::VectorXd d_next = o_t.cwiseProduct(map_tanh(c_next));

  if (record) {
    record->input_gate = i_t;
    record->forget_gate = f_t;
    record->output_gate = o_t;
    record->candidate = c_tilde;
  }
  return {std::move(c_next), std::move(d_next)};
}

CellState step(const GruParams& p, const CellState& state, const InputVector& x,
               GateRecord* record) {
  check_shape("gru step", p.K, p.reset.W, p.reset.U, p.reset.b);
  check_shape("gru step", p.K, p.update.W, p.update.U, p.update.b);
  check_shape("gru step", p.K, p.candidate.W, p.candidate.U, p.candidate.b);
  check_state("gru step", p.K, state.s);

  const Eigen::Vector2d xv = as_vec(x);
  const Eigen::VectorXd r_t = map_sigmoid(p.reset.W * xv + p.reset.U * state.s + p.reset.b);
  const Eigen::VectorXd z_t = map_sigmoid(p.update.W * xv + p.update.U * state.s + p.update.b);
  const Eigen::VectorXd s_tilde =
      map_tanh(p.candidate.W * xv + p.candidate.U * r_t.cwiseProduct(state.s) + p.candidate.b);
  Eigen::VectorXd next =
      z_t.cwiseProduct(s_tilde) + (Eigen::VectorXd::Ones(p.K) - z_t).cwiseProduct(state.s);

  if (record) {
    record->reset_gate = r_t;
    record->update_gate = z_t;
    record->candidate = s_tilde;
  }
  return {std::move(next), Eigen::VectorXd()};
}

CellState step(const PruParams& p, const CellState& state, const InputVector& x,
               GateRecord* record) {
  check_shape("pru step", p.K, p.update.W, p.update.U, p.update.b);
  check_shape("pru step", p.K, p.candidate.W, p.candidate.U, p.candidate.b);
  check_state("pru step", p.K, state.s);

  const Eigen::Vector2d xv = as_vec(x);
  const Eigen::VectorXd z_t = map_sigmoid(p.update.W * xv + p.update.U * state.s + p.update.b);
  const Eigen::VectorXd s_tilde =
      map_tanh(p.candidate.W * xv + p.candidate.U * state.s + p.candidate.b);
  Eigen::VectorXd next =
      z_t.cwiseProduct(s_tilde) + (Eigen::VectorXd::Ones(p.K) - z_t).cwiseProduct(state.s);

  if (record) {
    record->update_gate = z_t;
    record->candidate = s_tilde;
  }
  return {std::move(next), Eigen::VectorXd()};
}

double LinearClassifier::margin(const Eigen::VectorXd& s) const {
  if (beta.size() != s.size()) {
    throw std::invalid_argument("classify: classifier/state dimension mismatch");
  }
  return beta.dot(s) + gamma;
}

int LinearClassifier::classify(const Eigen::VectorXd& s) const {
  return margin(s) >= 0.0 ? +1 : -1;
}

Model model_of(const AnyParams& p) noexcept {
  switch (p.index()) {
    case 0: return Model::Vanilla;
    case 1: return Model::Lstm;
    case 2: return Model::Gru;
    default: return Model::Pru;
  }
}

int state_dim(const AnyParams& p) noexcept {
  return std::visit([](const auto& params) { return params.K; }, p);
}

CellState zero_state(const AnyParams& p) {
  return std::visit([](const auto& params) { return zero_state(params); }, p);
}

CellState step(const AnyParams& p, const CellState& state, const InputVector& x,
               GateRecord* record) {
  return std::visit([&](const auto& params) { return step(params, state, x, record); }, p);
}

Trajectory run(const AnyParams& p, const CellState& s0, const SamplePath& path,
               FlagEncoding enc, GateTrace* trace) {
  return std::visit([&](const auto& params) { return run(params, s0, path, enc, trace); }, p);
}

}  // namespace f1b
