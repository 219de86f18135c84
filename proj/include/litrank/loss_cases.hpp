#pragma once
// Fixed hand cases for the loss suite, shared by the unit tests and the
// acceptance run.

#include <cmath>
#include <vector>

#include "litrank/ranking_losses.hpp"

namespace litrank::loss_cases {

// Two documents, positive scored first by a margin of 1.
inline LabeledScores lambda_pair() { return {{2.0, 1.0}, {1.0, 0.0}}; }

// Ten documents with distinct scores spread over (-2.1, 2.1); positives at
// ranks 1, 3, 4 and 7.
inline LabeledScores ten_docs() {
  return {{2.1, 1.4, 0.9, 0.55, 0.2, -0.1, -0.45, -0.8, -1.3, -2.0}, {1, 0, 1, 1, 0, 0, 1, 0, 0, 0}};
}
inline double ten_docs_exact_ap() { return (1.0 + 2.0 / 3.0 + 3.0 / 4.0 + 4.0 / 7.0) / 4.0; }

}  // namespace litrank::loss_cases
