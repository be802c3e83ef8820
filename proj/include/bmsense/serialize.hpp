#ifndef BMSENSE_SERIALIZE_HPP
#define BMSENSE_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "bmsense/measurement.hpp"

namespace bmsense {

using Json = nlohmann::json;

// Complex scalars are serialized as [re, im] pairs; real scalars as numbers.
inline Json scalar_to_json(double v) { return Json(v); }
inline Json scalar_to_json(const Complex& v) {
  return Json::array({v.real(), v.imag()});
}

template <class Scalar>
Json matrix_to_json(const MatrixX<Scalar>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(scalar_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

template <class Scalar>
MatrixX<Scalar> matrix_from_json(const Json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols =
      rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  MatrixX<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& e = j.at(i).at(k);
      if constexpr (is_complex_v<Scalar>) {
        m(i, k) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
      } else {
        m(i, k) = e.get<double>();
      }
    }
  return m;
}

template <class Scalar>
Json problem_to_json(const Problem<Scalar>& prob,
                     bool include_truth = true) {
  Json j;
  j["field"] = field_name(field_of<Scalar>());
  j["ensemble"] = prob.measurements.spec.name();
  j["d"] = prob.d();
  j["r"] = prob.r();
  j["n"] = prob.n();
  j["seed"] = prob.seed;
  j["sigma"] = prob.sigma;
  j["y"] = std::vector<double>(prob.y.data(), prob.y.data() + prob.y.size());
  if (include_truth) j["truth_factor"] = matrix_to_json(prob.truth_factor);
  j["metadata"] = {{"trace_z", prob.trace_z},
                   {"lambda_r", prob.lambda_r},
                   {"incoherence", prob.incoherence}};
  return j;
}

// Rebuilds a problem from its serialized record.  The measurement ensemble
// is regenerated from (ensemble, d, n, seed); y and the truth factor are
// restored from the file, and the noise vector is recovered as
// y - A(Z_*) so the record round-trips exactly.
template <class Scalar>
Problem<Scalar> problem_from_json(const Json& j) {
  if (j.at("field").get<std::string>() !=
      field_name(field_of<Scalar>()))
    throw std::invalid_argument("problem_from_json: field mismatch");
  Problem<Scalar> prob;
  prob.seed = j.at("seed").get<std::uint64_t>();
  prob.sigma = j.at("sigma").get<double>();
  const auto d = j.at("d").get<Eigen::Index>();
  const auto n = j.at("n").get<Eigen::Index>();
  prob.measurements = sample_measurements<Scalar>(
      ensemble_from_name(j.at("ensemble").get<std::string>()), d, n,
      derive_seed(prob.seed, 1));
  const auto yv = j.at("y").get<std::vector<double>>();
  prob.y = Eigen::Map<const VectorXd>(yv.data(),
                                      static_cast<Eigen::Index>(yv.size()));
  if (!j.contains("truth_factor"))
    throw std::invalid_argument("problem_from_json: truth_factor required");
  prob.truth_factor = matrix_from_json<Scalar>(j.at("truth_factor"));
  prob.noise =
      prob.y - apply_operator_gram(prob.measurements, prob.truth_factor);
  const auto& meta = j.at("metadata");
  prob.trace_z = meta.at("trace_z").get<double>();
  prob.lambda_r = meta.at("lambda_r").get<double>();
  prob.incoherence = meta.at("incoherence").get<double>();
  return prob;
}

}  // namespace bmsense

#endif
