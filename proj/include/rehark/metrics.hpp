#pragma once

#include "core.hpp"

namespace rehark {

/// Fraction of positions where pred and truth agree.
inline double accuracy(const LabelVector& pred, const LabelVector& truth) {
    detail::require(pred.size() == truth.size(), ErrorCode::LengthMismatch,
                    std::to_string(pred.size()) + " predictions for " + std::to_string(truth.size()) + " labels");
    detail::require(!truth.empty(), ErrorCode::EmptyInput, "accuracy of an empty split");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace rehark
