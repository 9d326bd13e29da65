// SPDX-License-Identifier: Apache-2.0
//
// Dataset profiles: every tuned constant for a benchmark lives here.

#pragma once

#include <string>
#include <string_view>

#include "graspkp/dataset_tools.hpp"
#include "graspkp/evaluator.hpp"
#include "graspkp/gt_encoder.hpp"
#include "graspkp/grouper.hpp"

namespace graspkp {

struct Profile {
    std::string name;
    int numClasses = 18;
    int downsampleRatio = 4;
    int imageHeight = 0;
    int imageWidth = 0;
    GroupingThresholds thresholds;
    double evalHeight = 0.0;
    ChannelStats channelStats;

    static Profile cornell();
    static Profile ajd();
    /// Throws std::invalid_argument for unknown names.
    static Profile by_name(std::string_view name);

    EncoderConfig encoder() const;
    MatchCriteria criteria() const;
};

}  // namespace graspkp
