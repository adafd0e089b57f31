#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "featbench/image.hpp"
#include "featbench/keypoint.hpp"
#include "featbench/matcher.hpp"

namespace featbench {

/// Keypoint dump: JSON array sorted by descending response.
inline nlohmann::ordered_json keypoints_to_json(std::vector<Keypoint> kps) {
    std::stable_sort(kps.begin(), kps.end(),
                     [](const Keypoint& a, const Keypoint& b) { return a.response > b.response; });
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Keypoint& k : kps) {
        arr.push_back({{"x", k.x},
                       {"y", k.y},
                       {"scale", k.scale},
                       {"orientation_deg", k.orientation_deg},
                       {"response", k.response},
                       {"octave", k.octave},
                       {"laplacian_sign", k.laplacian_sign}});
    }
    return arr;
}

inline nlohmann::ordered_json matches_to_json(const std::vector<MatchPair>& matches) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const MatchPair& m : matches) {
        arr.push_back({{"query", m.query_index}, {"train", m.train_index}, {"distance", m.distance}});
    }
    return arr;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw io_error("cannot write file: " + path);
}

}  // namespace featbench
