#include "ffc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ffc {

ErrorReport error_metrics(const std::vector<double>& actual, const std::vector<double>& desired,
                          int transient_samples) {
  if (actual.size() != desired.size())
    throw std::invalid_argument("error_metrics: length mismatch");
  if (transient_samples < 0)
    throw std::invalid_argument("error_metrics: transient_samples must be >= 0");
  ErrorReport rep;
  rep.sample_count = actual.size();
  rep.transient_samples = transient_samples;
  double sq = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - desired[i];
    if (!std::isfinite(e)) throw std::invalid_argument("error_metrics: non-finite error");
    sq += e * e;
    if (i >= static_cast<std::size_t>(transient_samples) && std::abs(e) > rep.linf) {
      rep.linf = std::abs(e);
      rep.linf_index = i;
    }
  }
  rep.l2 = std::sqrt(sq);
  return rep;
}

std::vector<ErrorReport> error_metrics_multi(const MultiTrajectory& actual,
                                             const MultiTrajectory& desired,
                                             int transient_samples) {
  actual.check_consistent();
  desired.check_consistent();
  if (actual.joint_count() != desired.joint_count())
    throw std::invalid_argument("error_metrics_multi: joint count mismatch");
  std::vector<ErrorReport> out;
  for (std::size_t j = 0; j < actual.joint_count(); ++j)
    out.push_back(error_metrics(actual.channels[j], desired.channels[j], transient_samples));
  return out;
}

}  // namespace ffc
