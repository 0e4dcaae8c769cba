#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "f1b/process.hpp"

namespace f1b {

enum class Activation { Tanh, PiecewiseLinearG };
enum class Model { Vanilla, Lstm, Gru, Pru };

// Piecewise-linear stand-in for tanh: identity on [-1, 1], clamped outside.
double g_activation(double x) noexcept;
double sigmoid(double x) noexcept;
double apply_activation(Activation act, double x) noexcept;

// All parameter records use 64-bit floats. W is K x 2 with column 0
// multiplying the info component and column 1 the flag component.

struct VanillaParams {
  int K = 0;
  Eigen::MatrixXd W;  // K x 2
  Eigen::MatrixXd U;  // K x K
  Eigen::VectorXd b;  // K
  Activation activation = Activation::Tanh;
};

struct LstmGate {
  Eigen::MatrixXd W;  // K x 2
  Eigen::MatrixXd U;  // K x K, multiplies d_{t-1}
  Eigen::MatrixXd V;  // K x K, multiplies c_{t-1} (peephole)
  Eigen::VectorXd b;  // K
};

struct LstmParams {
  int K = 0;
  LstmGate input, forget, output, candidate;
};

struct GruGate {
  Eigen::MatrixXd W;  // K x 2
  Eigen::MatrixXd U;  // K x K
  Eigen::VectorXd b;  // K
};

struct GruParams {
  int K = 0;
  GruGate reset, update, candidate;
};

struct PruParams {
  int K = 0;
  GruGate update, candidate;
};

// State carried between steps. `s` is what classifiers read: the plain state
// for Vanilla/GRU/PRU and the memory cell c_t for LSTM. `d` is the LSTM
// activation output d_t and has size 0 for the other cells.
struct CellState {
  Eigen::VectorXd s;
  Eigen::VectorXd d;
};

// Intermediate values of one step, for diagnostics. Only the fields of the
// stepped model are filled.
struct GateRecord {
  Eigen::VectorXd pre;          // vanilla pre-activation
  Eigen::VectorXd input_gate;   // lstm i_t
  Eigen::VectorXd forget_gate;  // lstm f_t
  Eigen::VectorXd output_gate;  // lstm o_t
  Eigen::VectorXd reset_gate;   // gru r_t
  Eigen::VectorXd update_gate;  // gru/pru z_t
  Eigen::VectorXd candidate;    // c~_t or s~_t
};
using GateTrace = std::vector<GateRecord>;

CellState zero_state(const VanillaParams& p);
CellState zero_state(const LstmParams& p);
CellState zero_state(const GruParams& p);
CellState zero_state(const PruParams& p);

// s' = act(W x + U s + b)
CellState step(const VanillaParams& p, const CellState& state, const InputVector& x,
               GateRecord* record = nullptr);
// c' = i.*c~ + f.*c ; d' = o.*tanh(c')
CellState step(const LstmParams& p, const CellState& state, const InputVector& x,
               GateRecord* record = nullptr);
// s' = z.*s~ + (1-z).*s with s~ = tanh(W x + U (r.*s) + b)
CellState step(const GruParams& p, const CellState& state, const InputVector& x,
               GateRecord* record = nullptr);
// single-gate variant: s~ = tanh(W x + U s + b)
CellState step(const PruParams& p, const CellState& state, const InputVector& x,
               GateRecord* record = nullptr);

using Trajectory = std::vector<CellState>;  // trajectory[t] is the state after step t

// Feeds the encoded path through the cell; the result has n+1 entries and
// starts with s0. Throws on dimension mismatch or an empty path.
template <typename Params>
Trajectory run(const Params& p, const CellState& s0, const SamplePath& path,
               FlagEncoding enc, GateTrace* trace = nullptr) {
  if (path.n < 1) throw std::invalid_argument("run: empty path");
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(path.n) + 1);
  traj.push_back(s0);
  if (trace) {
    trace->clear();
    trace->reserve(static_cast<std::size_t>(path.n));
  }
  for (int t = 1; t <= path.n; ++t) {
    GateRecord record;
    traj.push_back(step(p, traj.back(), encode(path, t, enc), trace ? &record : nullptr));
    if (trace) trace->push_back(std::move(record));
  }
  return traj;
}

// C(s) = +1 iff beta.s + gamma >= 0; ties go to +1.
struct LinearClassifier {
  Eigen::VectorXd beta;
  double gamma = 0.0;

  double margin(const Eigen::VectorXd& s) const;
  int classify(const Eigen::VectorXd& s) const;
};

using AnyParams = std::variant<VanillaParams, LstmParams, GruParams, PruParams>;

Model model_of(const AnyParams& p) noexcept;
int state_dim(const AnyParams& p) noexcept;
CellState zero_state(const AnyParams& p);
CellState step(const AnyParams& p, const CellState& state, const InputVector& x,
               GateRecord* record = nullptr);
Trajectory run(const AnyParams& p, const CellState& s0, const SamplePath& path,
               FlagEncoding enc, GateTrace* trace = nullptr);

}  // namespace f1b
