// SPDX-License-Identifier: Apache-2.0
//
// JSON-lines grasp records:
//   {"x": 12.5, "y": 40.0, "theta_deg": -30.0, "w": 22.0, "h": 18.0 | null}
// Angles are degrees on disk and radians in memory. An optional "image"
// string groups records that belong to different images, and a record of the
// form {"image": "id", "empty": true} declares an image with no grasps.
// Lines carrying a "meta" key are metadata and are skipped by the readers.

#pragma once

#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "graspkp/geometry.hpp"

namespace graspkp {

class AnnotationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::string kDefaultImageId = "default";

/// Parses one record. The angle is folded into (-pi/2, pi/2].
Grasp grasp_from_json(const nlohmann::json& record);
nlohmann::json grasp_to_json(const Grasp& g);

using ImageGrasps = std::map<std::string, std::vector<Grasp>>;

/// All grasps of a stream in file order, ignoring image ids and empty-image
/// records.
std::vector<Grasp> read_annotations(std::istream& in);
std::vector<Grasp> read_annotations_file(const std::string& path);

/// Records grouped by their "image" field (kDefaultImageId when absent),
/// preserving file order inside each image.
ImageGrasps read_image_grasps(std::istream& in);
ImageGrasps read_image_grasps_file(const std::string& path);

void write_annotations(std::ostream& out, const std::vector<Grasp>& grasps);

}  // namespace graspkp
