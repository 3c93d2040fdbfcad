#pragma once

#include <filesystem>
#include <string>

#include "handtrack/camera.hpp"
#include "handtrack/energy.hpp"

namespace handtrack {

// JSON config blocks. Parsing is strict: unknown fields are format errors.
Camera camera_from_json_text(const std::string& text);
std::string camera_to_json_text(const Camera& camera);
Camera load_camera(const std::filesystem::path& path);

// Missing fields keep their defaults, so a weights file may override a subset.
EnergyWeights weights_from_json_text(const std::string& text);
std::string weights_to_json_text(const EnergyWeights& weights);
EnergyWeights load_weights(const std::filesystem::path& path);

}  // namespace handtrack
