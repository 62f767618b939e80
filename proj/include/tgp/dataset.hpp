#pragma once

#include <string>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/linalg.hpp"

namespace tgp {

enum class Split { Train, Test };

inline std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

/// Inputs plus either real targets (regression) or class indices.
struct LabeledDataset {
  Matrix inputs;                 // n x d
  Vector targets;                // regression targets, empty for classification
  std::vector<int> labels;       // class indices, empty for regression
  int class_count = 0;           // > 0 iff classification
  Split split = Split::Train;
  std::string provenance;

  Eigen::Index size() const noexcept { return inputs.rows(); }
  Eigen::Index dim() const noexcept { return inputs.cols(); }
  bool is_classification() const noexcept { return class_count > 0; }

  void validate() const {
    require(inputs.rows() >= 1, ErrorCode::EmptyInput, "dataset has no examples");
    require(inputs.allFinite(), ErrorCode::NonFiniteInput, "dataset inputs are not finite");
    if (is_classification()) {
      require(static_cast<Eigen::Index>(labels.size()) == inputs.rows(), ErrorCode::LengthMismatch,
              "label count differs from input rows");
      for (int y : labels)
        require(y >= 0 && y < class_count, ErrorCode::LabelOutOfRange, "label outside [0, class_count)");
    } else {
      require(targets.size() == inputs.rows(), ErrorCode::LengthMismatch, "target count differs from input rows");
    }
  }
};

}  // namespace tgp
