#include "liebridge/metric_io.hpp"

#include <fstream>

#include "liebridge/errors.hpp"

namespace liebridge {

nlohmann::json metric_to_json(const MetricTensor& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        rows.push_back({a.matrix()(i, 0), a.matrix()(i, 1), a.matrix()(i, 2)});
    }
    return {{"a", rows}};
}

MetricTensor metric_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("a")) {
        throw ArgumentError("metric JSON must be an object with key \"a\"");
    }
    const auto& rows = j.at("a");
    if (!rows.is_array() || rows.size() != 3) {
        throw ArgumentError("metric \"a\" must have 3 rows");
    }
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != 3) {
            throw ArgumentError("metric row " + std::to_string(i) + " must have 3 entries");
        }
        for (int k = 0; k < 3; ++k) {
            if (!row[k].is_number()) {
                throw ArgumentError("metric entries must be numbers");
            }
            m(i, k) = row[k].get<double>();
        }
    }
    return MetricTensor(m);
}

MetricTensor load_metric(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open metric file " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError("metric file " + path + ": " + e.what());
    }
    return metric_from_json(j);
}

void save_metric(const MetricTensor& a, const std::string& path) {
    std::ofstream out(path);
    out << metric_to_json(a).dump(2) << '\n';
}

}  // namespace liebridge
