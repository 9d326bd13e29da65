// SPDX-License-Identifier: Apache-2.0

#include "graspkp/profile.hpp"

#include <stdexcept>

namespace graspkp {

// Image sizes give 57x57 (Cornell) and 128x128 (AJD) heatmaps at R = 4.

Profile Profile::cornell() {
    Profile p;
    p.name = "cornell";
    p.numClasses = 18;
    p.downsampleRatio = 4;
    p.imageHeight = 227;
    p.imageWidth = 227;
    p.thresholds = {1.0, 0.05, 0.24, 100};
    p.evalHeight = 23.33;
    p.channelStats = ChannelStats::cornell();
    return p;
}

Profile Profile::ajd() {
    Profile p;
    p.name = "ajd";
    p.numClasses = 36;
    p.downsampleRatio = 4;
    p.imageHeight = 512;
    p.imageWidth = 512;
    p.thresholds = {0.65, 0.15, 0.1745, 100};
    p.evalHeight = 20.0;
    p.channelStats = ChannelStats::ajd();
    return p;
}

Profile Profile::by_name(std::string_view name) {
    if (name == "cornell") return cornell();
    if (name == "ajd") return ajd();
    throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected cornell or ajd)");
}

EncoderConfig Profile::encoder() const {
    EncoderConfig c;
    c.downsampleRatio = downsampleRatio;
    c.numClasses = numClasses;
    c.imageHeight = imageHeight;
    c.imageWidth = imageWidth;
    return c;
}

MatchCriteria Profile::criteria() const {
    MatchCriteria m;
    m.evalHeight = evalHeight;
    return m;
}

}  // namespace graspkp
