#pragma once

#include <string>

#include <json.hpp>

#include "liebridge/so3.hpp"

namespace liebridge {

/// {"a": [[..],[..],[..]]}, row-major.
nlohmann::json metric_to_json(const MetricTensor& a);

/// Throws ArgumentError on a malformed or asymmetric matrix, NotSPDError if not SPD.
MetricTensor metric_from_json(const nlohmann::json& j);

MetricTensor load_metric(const std::string& path);
void save_metric(const MetricTensor& a, const std::string& path);

}  // namespace liebridge
