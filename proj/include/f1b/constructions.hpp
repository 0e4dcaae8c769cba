#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "f1b/cells.hpp"

namespace f1b {

// Thrown when a construction's parameter constraints do not hold; carries the
// name of the violated constraint.
class ConstraintError : public std::invalid_argument {
 public:
  ConstraintError(std::string constraint, const std::string& detail)
      : std::invalid_argument(constraint + ": " + detail),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

// A parameter record together with everything needed to evaluate it on the
// flagged-bit task: initial state, flag encoding, and the classifier that is
// claimed to separate the classes.
struct ModelSystem {
  AnyParams params;
  CellState s0;
  FlagEncoding encoding = FlagEncoding::Symmetric;
  LinearClassifier classifier;
};

// Single-dimension gated construction. The update gate sees only the flag
// component (weight a) and the candidate only the info component (weight b);
// everything else is zero. With A = sigmoid(a) and B = tanh(b), the state
// obeys, under the symmetric encoding,
//   s_t = A s_{t-1} + (1-A) B x_t^info   off the flag,
//   s_t = (1-A) s_{t-1} + A B x_t^info   at the flag.
struct GruK1Construction {
  double a = 0.0;
  double b = 0.0;

  double gate_constant() const;   // A = sigmoid(a), must lie in (0,1)
  double input_constant() const;  // B = tanh(b)
};

GruParams gru_k1_params(const GruK1Construction& c);
PruParams pru_k1_params(const GruK1Construction& c);
// Derived analogue: input gate sees +a on the flag component, forget gate -a,
// so i = sigmoid(a x_flag) and f = sigmoid(-a x_flag) = 1 - i pair up into the
// same swapped convex combination. Output gate weights are zero (o = 0.5);
// classification reads the memory cell.
LstmParams lstm_k1_params(const GruK1Construction& c);

// Smallest a (on a 1e-6 grid) such that A = sigmoid(a) gives a certified
// separation margin factor 2 A^n - 1 >= margin.
double choose_a(int n, double margin);

// s0 = 0 and a threshold-at-zero classifier, shared by the three gated
// constructions (LSTM classifies on the memory cell, which CellState::s holds).
ModelSystem gru_k1_system(const GruK1Construction& c);
ModelSystem pru_k1_system(const GruK1Construction& c);
ModelSystem lstm_k1_system(const GruK1Construction& c);

// Two-dimensional saturating construction. Coordinate 1 memorizes, coordinate
// 2 loads; flags must use the {0,1} encoding and the activation is the
// clamped identity g. The update reads
//   s1' = g(s1 + b1 s2 + b1)
//   s2' = g(w21 x_info - b2 x_flag + b2)
struct VanillaK2Construction {
  double b1 = 0.5;
  double w21 = 0.5;
  double b2 = -2.0;

  // Throws ConstraintError naming the first violated condition.
  void validate() const;
};

struct VanillaK2System {
  VanillaParams params;          // g activation, K = 2
  CellState s0;                  // (0, -1)
  FlagEncoding encoding;         // Binary
  LinearClassifier classifier;   // beta = (1, b1), gamma = 0
  ModelSystem as_system() const;
};

VanillaK2System vanilla_k2_params(const VanillaK2Construction& c);

// The four transition mechanisms of the saturating construction.
enum class Mechanism { LoadEmptying, FeatureLoading, Memorization, StateMixing };
const char* mechanism_name(Mechanism m) noexcept;

// Which mechanism conditions hold for the transition out of `prev` on input
// `x` (binary flag encoding). On every transition reachable from (0,-1)
// exactly two are active.
std::vector<Mechanism> mechanism_of(const VanillaK2Construction& c,
                                    const CellState& prev, const InputVector& x);

// Embeds a K-dimensional system into K+1 dimensions with zero rows/columns so
// the extra coordinate stays exactly 0 and the first K coordinates evolve
// bit-identically.
VanillaParams lift(const VanillaParams& p);
LstmParams lift(const LstmParams& p);
GruParams lift(const GruParams& p);
PruParams lift(const PruParams& p);
std::pair<AnyParams, CellState> lift(const AnyParams& params, const CellState& s0);

}  // namespace f1b
