#pragma once

#include <string>

#include <json.hpp>

#include "f1b/trainer.hpp"

namespace f1b {

using nlohmann::json;

// Matrices serialize with explicit shape fields:
//   {"rows": r, "cols": c, "data": [row-major...]}
// and vectors as {"size": k, "data": [...]}.
json matrix_to_json(const Eigen::MatrixXd& m);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const json& j);
Eigen::VectorXd vector_from_json(const json& j);

std::string to_string(Model model);
std::string to_string(FlagEncoding enc);
std::string to_string(Activation act);
Model model_from_string(const std::string& name);
FlagEncoding encoding_from_string(const std::string& name);
Activation activation_from_string(const std::string& name);

json params_to_json(const AnyParams& params);
AnyParams params_from_json(const json& j);

json classifier_to_json(const LinearClassifier& c);
LinearClassifier classifier_from_json(const json& j);

json state_to_json(const CellState& s);
CellState state_from_json(const json& j);

// The bundle written by `construct` and consumed by --params: parameters plus
// initial state, encoding, and classifier.
json system_to_json(const ModelSystem& system);
ModelSystem system_from_json(const json& j);

json exact_result_to_json(const ExactResult& r);
json interval_cert_to_json(const IntervalCert& c);
json moment_series_to_json(const MomentSeries& m);
json mc_error_to_json(const McErrorResult& r);
json sweep_report_to_json(const SweepReport& r);
json distribution_series_to_json(const DistributionSeries& s);
json train_report_to_json(const TrainReport& r);
json replay_result_to_json(const ReplayResult& r);

}  // namespace f1b
