#include "epipolar/types.h"

#include <string>

#include "epipolar/error.h"

namespace epipolar {

bool CorrespondenceSet::HasFlags() const {
  for (const auto& pair : pairs) {
    if (!pair.is_true_inlier.has_value()) return false;
  }
  return true;
}

void CorrespondenceSet::Validate() const {
  if (weights && weights->size() != pairs.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "weights length " + std::to_string(weights->size()) +
                    " does not match " + std::to_string(pairs.size()) +
                    " pairs");
  }
}

CorrespondenceSet CorrespondenceSet::Subset(
    const std::vector<std::size_t>& indices) const {
  CorrespondenceSet out;
  out.pairs.reserve(indices.size());
  if (weights) out.weights.emplace();
  for (const std::size_t i : indices) {
    out.pairs.push_back(pairs.at(i));
    if (weights) out.weights->push_back(weights->at(i));
  }
  return out;
}

}  // namespace epipolar
