#include "bmsense/measurement.hpp"

namespace bmsense {

EnsembleSpec ensemble_from_name(const std::string& name) {
  EnsembleSpec spec;
  if (name == "real_gaussian") {
    spec.kind = EnsembleKind::RealGaussian;
  } else if (name == "complex_gaussian") {
    spec.kind = EnsembleKind::ComplexGaussian;
  } else if (name == "complex_on_real") {
    spec.kind = EnsembleKind::ComplexOnRealSignal;
  } else if (name == "rademacher") {
    spec.kind = EnsembleKind::SubGaussianIID;
    spec.distribution = SubGaussianDist::Rademacher;
  } else if (name == "uniform_phase") {
    spec.kind = EnsembleKind::SubGaussianIID;
    spec.distribution = SubGaussianDist::UniformPhase;
  } else if (name == "scaled_bernoulli") {
    spec.kind = EnsembleKind::SubGaussianIID;
    spec.distribution = SubGaussianDist::ScaledBernoulli;
  } else if (name == "student_bounded") {
    spec.kind = EnsembleKind::SubGaussianIID;
    spec.distribution = SubGaussianDist::StudentLikeBounded;
  } else {
    throw std::invalid_argument("unknown ensemble name: " + name);
  }
  return spec;
}

}  // namespace bmsense
