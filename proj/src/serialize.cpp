#include "f1b/serialize.hpp"

#include <stdexcept>

namespace f1b {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

json vector_to_json(const Eigen::VectorXd& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v[i]);
  return {{"size", v.size()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix json: data length disagrees with shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto size = j.at("size").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (size < 0 || static_cast<Eigen::Index>(data.size()) != size) {
    throw std::invalid_argument("vector json: data length disagrees with size");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = data[static_cast<std::size_t>(i)].get<double>();
  return v;
}

std::string to_string(Model model) {
  switch (model) {
    case Model::Vanilla: return "vanilla";
    case Model::Lstm: return "lstm";
    case Model::Gru: return "gru";
    case Model::Pru: return "pru";
  }
  return "?";
}

std::string to_string(FlagEncoding enc) {
  return enc == FlagEncoding::Symmetric ? "symmetric" : "binary";
}

std::string to_string(Activation act) {
  return act == Activation::Tanh ? "tanh" : "g";
}

Model model_from_string(const std::string& name) {
  if (name == "vanilla") return Model::Vanilla;
  if (name == "lstm") return Model::Lstm;
  if (name == "gru") return Model::Gru;
  if (name == "pru") return Model::Pru;
  throw std::invalid_argument("unknown model: " + name);
}

FlagEncoding encoding_from_string(const std::string& name) {
  if (name == "symmetric") return FlagEncoding::Symmetric;
  if (name == "binary") return FlagEncoding::Binary;
  throw std::invalid_argument("unknown flag encoding: " + name);
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "g") return Activation::PiecewiseLinearG;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {

json gru_gate_to_json(const GruGate& g) {
  return {{"W", matrix_to_json(g.W)}, {"U", matrix_to_json(g.U)}, {"b", vector_to_json(g.b)}};
}

GruGate gru_gate_from_json(const json& j) {
  return {matrix_from_json(j.at("W")), matrix_from_json(j.at("U")),
          vector_from_json(j.at("b"))};
}

json lstm_gate_to_json(const LstmGate& g) {
  return {{"W", matrix_to_json(g.W)},
          {"U", matrix_to_json(g.U)},
          {"V", matrix_to_json(g.V)},
          {"b", vector_to_json(g.b)}};
}

LstmGate lstm_gate_from_json(const json& j) {
  return {matrix_from_json(j.at("W")), matrix_from_json(j.at("U")),
          matrix_from_json(j.at("V")), vector_from_json(j.at("b"))};
}

}  // namespace

json params_to_json(const AnyParams& params) {
  json j;
  j["model"] = to_string(model_of(params));
  j["K"] = state_dim(params);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, VanillaParams>) {
          j["W"] = matrix_to_json(p.W);
          j["U"] = matrix_to_json(p.U);
          j["b"] = vector_to_json(p.b);
          j["activation"] = to_string(p.activation);
        } else if constexpr (std::is_same_v<T, LstmParams>) {
          j["input"] = lstm_gate_to_json(p.input);
          j["forget"] = lstm_gate_to_json(p.forget);
          j["output"] = lstm_gate_to_json(p.output);
          j["candidate"] = lstm_gate_to_json(p.candidate);
        } else if constexpr (std::is_same_v<T, GruParams>) {
          j["reset"] = gru_gate_to_json(p.reset);
          j["update"] = gru_gate_to_json(p.update);
          j["candidate"] = gru_gate_to_json(p.candidate);
        } else {
          j["update"] = gru_gate_to_json(p.update);
          j["candidate"] = gru_gate_to_json(p.candidate);
        }
      },
      params);
  return j;
}

AnyParams params_from_json(const json& j) {
  const Model model = model_from_string(j.at("model").get<std::string>());
  const int K = j.at("K").get<int>();
  switch (model) {
    case Model::Vanilla: {
      VanillaParams p;
      p.K = K;
      p.W = matrix_from_json(j.at("W"));
      p.U = matrix_from_json(j.at("U"));
      p.b = vector_from_json(j.at("b"));
      p.activation = activation_from_string(j.at("activation").get<std::string>());
      return p;
    }
    case Model::Lstm: {
      LstmParams p;
      p.K = K;
      p.input = lstm_gate_from_json(j.at("input"));
      p.forget = lstm_gate_from_json(j.at("forget"));
      p.output = lstm_gate_from_json(j.at("output"));
      p.candidate = lstm_gate_from_json(j.at("candidate"));
      return p;
    }
    case Model::Gru: {
      GruParams p;
      p.K = K;
      p.reset = gru_gate_from_json(j.at("reset"));
      p.update = gru_gate_from_json(j.at("update"));
      p.candidate = gru_gate_from_json(j.at("candidate"));
      return p;
    }
    case Model::Pru: {
      PruParams p;
      p.K = K;
      p.update = gru_gate_from_json(j.at("update"));
      p.candidate = gru_gate_from_json(j.at("candidate"));
      return p;
    }
  }
  throw std::invalid_argument("params json: unreachable model tag");
}

json classifier_to_json(const LinearClassifier& c) {
  json beta = json::array();
  for (Eigen::Index i = 0; i < c.beta.size(); ++i) beta.push_back(c.beta[i]);
  return {{"beta", std::move(beta)}, {"gamma", c.gamma}};
}

LinearClassifier classifier_from_json(const json& j) {
  LinearClassifier c;
  const auto& beta = j.at("beta");
  c.beta = Eigen::VectorXd(beta.size());
  for (std::size_t i = 0; i < beta.size(); ++i) c.beta[static_cast<Eigen::Index>(i)] = beta[i].get<double>();
  c.gamma = j.at("gamma").get<double>();
  return c;
}

json state_to_json(const CellState& s) {
  json j;
  j["s"] = json::array();
  for (Eigen::Index i = 0; i < s.s.size(); ++i) j["s"].push_back(s.s[i]);
  if (s.d.size() > 0) {
    j["d"] = json::array();
    for (Eigen::Index i = 0; i < s.d.size(); ++i) j["d"].push_back(s.d[i]);
  }
  return j;
}

CellState state_from_json(const json& j) {
  CellState state;
  const auto& s = j.at("s");
  state.s = Eigen::VectorXd(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) state.s[static_cast<Eigen::Index>(i)] = s[i].get<double>();
  if (j.contains("d")) {
    const auto& d = j.at("d");
    state.d = Eigen::VectorXd(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) state.d[static_cast<Eigen::Index>(i)] = d[i].get<double>();
  }
  return state;
}

json system_to_json(const ModelSystem& system) {
  return {{"model", to_string(model_of(system.params))},
          {"K", state_dim(system.params)},
          {"params", params_to_json(system.params)},
          {"s0", state_to_json(system.s0)},
          {"encoding", to_string(system.encoding)},
          {"classifier", classifier_to_json(system.classifier)}};
}

ModelSystem system_from_json(const json& j) {
  ModelSystem system;
  system.params = params_from_json(j.at("params"));
  system.s0 = j.contains("s0") ? state_from_json(j.at("s0")) : zero_state(system.params);
  system.encoding = j.contains("encoding")
                        ? encoding_from_string(j.at("encoding").get<std::string>())
                        : FlagEncoding::Symmetric;
  if (j.contains("classifier")) {
    system.classifier = classifier_from_json(j.at("classifier"));
  } else {
    system.classifier.beta = Eigen::VectorXd::Zero(state_dim(system.params));
    system.classifier.beta[0] = 1.0;
    system.classifier.gamma = 0.0;
  }
  if (system.s0.d.size() == 0 && model_of(system.params) == Model::Lstm) {
    system.s0.d = Eigen::VectorXd::Zero(state_dim(system.params));
  }
  return system;
}

json exact_result_to_json(const ExactResult& r) {
  return {{"n", r.n},
          {"total_paths", r.total_paths},
          {"errors", r.errors},
          {"error_probability", r.error_probability()},
          {"min_margin_pos", r.min_margin_pos},
          {"max_margin_neg", r.max_margin_neg}};
}

json interval_cert_to_json(const IntervalCert& c) {
  json j;
  j["n"] = c.n;
  j["certified"] = c.certified;
  j["certified_margin"] = c.certified_margin;
  if (!c.pos_final.empty()) {
    json pos = json::array(), neg = json::array();
    for (const Interval& iv : c.pos_final) pos.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
    for (const Interval& iv : c.neg_final) neg.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
    j["pos_final"] = std::move(pos);
    j["neg_final"] = std::move(neg);
  }
  if (!c.pos_final_states.empty()) {
    auto dump = [](const std::vector<std::vector<Eigen::Vector2d>>& sets) {
      json out = json::array();
      for (const auto& set : sets) {
        json pts = json::array();
        for (const auto& p : set) pts.push_back({p.x(), p.y()});
        out.push_back(std::move(pts));
      }
      return out;
    };
    j["pos_final_states"] = dump(c.pos_final_states);
    j["neg_final_states"] = dump(c.neg_final_states);
  }
  return j;
}

json moment_series_to_json(const MomentSeries& m) {
  return {{"n", m.n},
          {"mean_pos", m.mean_pos},
          {"var_pos", m.var_pos},
          {"mean_neg", m.mean_neg},
          {"var_neg", m.var_neg},
          {"chebyshev_bound", m.chebyshev_bound}};
}

json mc_error_to_json(const McErrorResult& r) {
  return {{"estimate", r.estimate},
          {"errors", r.errors},
          {"paths", r.paths},
          {"ci_lo", r.ci.lo},
          {"ci_hi", r.ci.hi}};
}

json sweep_report_to_json(const SweepReport& r) {
  json points = json::array();
  for (const SweepPoint& p : r.points) {
    points.push_back({{"U", p.U},
                      {"W1", p.W1},
                      {"W2", p.W2},
                      {"err", p.error},
                      {"ci_lo", p.ci.lo},
                      {"ci_hi", p.ci.hi}});
  }
  return {{"n", r.n},
          {"paths_per_class", r.paths_per_class},
          {"seed", r.seed},
          {"min_error", r.min_error},
          {"argmin", r.argmin},
          {"points", std::move(points)}};
}

json distribution_series_to_json(const DistributionSeries& s) {
  json histograms = json::array();
  for (std::size_t si = 0; si < s.histograms.size(); ++si) {
    for (std::size_t k = 0; k < s.histograms[si].size(); ++k) {
      const Histogram& h = s.histograms[si][k];
      histograms.push_back({{"t", s.snapshot_times[si]},
                            {"coord", k + 1},
                            {"bin_edges", h.bin_edges},
                            {"count_pos", h.counts_pos},
                            {"count_neg", h.counts_neg}});
    }
  }
  json j = {{"n", s.n}, {"snapshot_times", s.snapshot_times}, {"histograms", std::move(histograms)}};
  if (!s.scatter_pos.empty()) {
    auto dump = [](const std::vector<std::vector<Eigen::Vector2d>>& scatter) {
      json out = json::array();
      for (const auto& snap : scatter) {
        json pts = json::array();
        for (const auto& p : snap) pts.push_back({p.x(), p.y()});
        out.push_back(std::move(pts));
      }
      return out;
    };
    j["scatter_pos"] = dump(s.scatter_pos);
    j["scatter_neg"] = dump(s.scatter_neg);
  }
  return j;
}

json train_report_to_json(const TrainReport& r) {
  return {{"loss_curve", r.loss_curve},
          {"final_accuracy", r.final_accuracy},
          {"separable", r.separable},
          {"separability_error", r.separability_error},
          {"converged", r.converged},
          {"diverged", r.diverged}};
}

json replay_result_to_json(const ReplayResult& r) {
  return {{"err_loading_coord2", r.err_loading_coord2},
          {"err_after_coord2", r.err_after_coord2},
          {"err_after_coord1", r.err_after_coord1},
          {"err_final_coord1", r.err_final_coord1},
          {"separable", r.separable},
          {"final_error_2d", r.final_error_2d},
          {"separator", classifier_to_json(r.separator)}};
}

}  // namespace f1b
