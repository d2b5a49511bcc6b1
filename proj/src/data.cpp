#include "pfo/data.hpp"

namespace pfo {

Sample Dataset::sample(Index i) const {
  require(i >= 0 && i < size(), ErrorCode::InvalidArgument, "sample index out of range");
  return Sample{features.row(i).cast<double>().transpose(), labels[static_cast<std::size_t>(i)]};
}

void Dataset::validate() const {
  require(d >= 1, ErrorCode::Format, name + ": feature dimension must be positive");
  require(num_classes >= 1, ErrorCode::Format, name + ": class count must be positive");
  require(features.rows() == size() && features.cols() == d, ErrorCode::Format,
          name + ": feature matrix shape does not match sample count");
  require(features.allFinite(), ErrorCode::Format, name + ": non-finite feature value");
  for (int y : labels) {
    require(y >= 1 && y <= num_classes, ErrorCode::Format,
            name + ": label " + std::to_string(y) + " outside 1.." + std::to_string(num_classes));
  }
}

Dataset make_dataset(std::string name, int num_classes, const std::vector<Sample>& samples) {
  Dataset ds;
  ds.name = std::move(name);
  ds.num_classes = num_classes;
  require(!samples.empty(), ErrorCode::InvalidArgument, ds.name + ": no samples");
  ds.d = samples.front().features.size();
  ds.features.resize(static_cast<Index>(samples.size()), ds.d);
  ds.labels.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(samples[i].features.size() == ds.d, ErrorCode::DimensionMismatch,
            ds.name + ": samples disagree on feature dimension");
    ds.features.row(static_cast<Index>(i)) = samples[i].features.cast<float>().transpose();
    ds.labels.push_back(samples[i].label);
  }
  ds.validate();
  return ds;
}

}  // namespace pfo
