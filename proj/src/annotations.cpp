// SPDX-License-Identifier: Apache-2.0

#include "graspkp/annotations.hpp"

#include <fstream>
#include <functional>

namespace graspkp {

namespace {

constexpr double kDegToRad = kPi / 180.0;

double number_field(const nlohmann::json& record, const char* key) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_number()) {
        throw AnnotationError(std::string("field '") + key + "' missing or not a number");
    }
    return it->get<double>();
}

void for_each_record(std::istream& in, const std::function<void(const nlohmann::json&)>& fn) {
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw AnnotationError("line " + std::to_string(lineNo) + ": " + e.what());
        }
        if (!record.is_object()) {
            throw AnnotationError("line " + std::to_string(lineNo) + ": record is not an object");
        }
        if (record.contains("meta")) continue;
        try {
            fn(record);
        } catch (const AnnotationError& e) {
            throw AnnotationError("line " + std::to_string(lineNo) + ": " + e.what());
        } catch (const GeometryError& e) {
            throw AnnotationError("line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
}

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw AnnotationError("cannot open annotation file '" + path + "'");
    }
    return in;
}

}  // namespace

Grasp grasp_from_json(const nlohmann::json& record) {
    Grasp g;
    g.x = number_field(record, "x");
    g.y = number_field(record, "y");
    g.theta = fold_angle(number_field(record, "theta_deg") * kDegToRad);
    g.w = number_field(record, "w");
    if (auto it = record.find("h"); it != record.end() && !it->is_null()) {
        if (!it->is_number()) throw AnnotationError("field 'h' must be a number or null");
        g.h = it->get<double>();
    }
    validate(g);
    return g;
}

nlohmann::json grasp_to_json(const Grasp& g) {
    nlohmann::json j;
    j["x"] = g.x;
    j["y"] = g.y;
    j["theta_deg"] = g.theta / kDegToRad;
    j["w"] = g.w;
    j["h"] = g.h ? nlohmann::json(*g.h) : nlohmann::json(nullptr);
    return j;
}

std::vector<Grasp> read_annotations(std::istream& in) {
    std::vector<Grasp> out;
    for_each_record(in, [&](const nlohmann::json& r) {
        if (!r.value("empty", false)) out.push_back(grasp_from_json(r));
    });
    return out;
}

std::vector<Grasp> read_annotations_file(const std::string& path) {
    auto in = open(path);
    return read_annotations(in);
}

ImageGrasps read_image_grasps(std::istream& in) {
    ImageGrasps out;
    for_each_record(in, [&](const nlohmann::json& r) {
        std::string id = kDefaultImageId;
        if (auto it = r.find("image"); it != r.end()) {
            if (it->is_string()) {
                id = it->get<std::string>();
            } else if (it->is_number_integer()) {
                id = std::to_string(it->get<long long>());
            } else {
                throw AnnotationError("field 'image' must be a string or integer");
            }
        }
        // A record with "empty": true declares an image without grasps.
        if (r.value("empty", false)) {
            out[id];
            return;
        }
        out[id].push_back(grasp_from_json(r));
    });
    return out;
}

ImageGrasps read_image_grasps_file(const std::string& path) {
    auto in = open(path);
    return read_image_grasps(in);
}

void write_annotations(std::ostream& out, const std::vector<Grasp>& grasps) {
    for (const auto& g : grasps) {
        out << grasp_to_json(g).dump() << '\n';
    }
}

}  // namespace graspkp
