#pragma once

// JSON forms of the detector and estimator results (nlohmann::json).
// Non-finite numbers are written as the strings "inf", "-inf" and "nan".

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmtres/detect.hpp"
#include "rmtres/estimate.hpp"

namespace rmtres {

namespace detail {

inline nlohmann::json real_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double real_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw InvalidInput("bad number '" + s + "' in JSON");
    }
    return j.get<double>();
}

inline nlohmann::json reals_to_json(const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(real_to_json(x));
    return a;
}

inline std::vector<double> reals_from_json(const nlohmann::json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(real_from_json(x));
    return v;
}

inline KappaBranch branch_from_string(const std::string& s) {
    if (s == "min_all") return KappaBranch::min_all;
    if (s == "median_outside") return KappaBranch::median_outside;
    if (s == "min_lambda0") return KappaBranch::min_lambda0;
    throw InvalidInput("unknown kappa branch '" + s + "'");
}

} // namespace detail

inline void to_json(nlohmann::json& j, const DetectionResult& r) {
    nlohmann::json l0 = nlohmann::json::array();
    for (const auto& v : r.lambda0_per_view) l0.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    j = nlohmann::json{{"kappa", r.kappa},
                       {"threshold", r.threshold},
                       {"is_upscaled", r.is_upscaled},
                       {"per_view_lambda", r.per_view_lambda},
                       {"below_set", r.below_set},
                       {"lambda0_per_view", l0},
                       {"n", r.n},
                       {"k", r.k},
                       {"beta", r.beta},
                       {"sigma_w2", r.sigma_w2},
                       {"lower_edge", r.lower_edge},
                       {"degenerate_views", r.degenerate_views},
                       {"branch", to_string(r.branch)}};
}

inline void from_json(const nlohmann::json& j, DetectionResult& r) {
    j.at("kappa").get_to(r.kappa);
    j.at("threshold").get_to(r.threshold);
    j.at("is_upscaled").get_to(r.is_upscaled);
    j.at("per_view_lambda").get_to(r.per_view_lambda);
    j.at("below_set").get_to(r.below_set);
    r.lambda0_per_view.clear();
    for (const auto& v : j.at("lambda0_per_view")) {
        r.lambda0_per_view.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
    j.at("n").get_to(r.n);
    j.at("k").get_to(r.k);
    j.at("beta").get_to(r.beta);
    j.at("sigma_w2").get_to(r.sigma_w2);
    j.at("lower_edge").get_to(r.lower_edge);
    j.at("degenerate_views").get_to(r.degenerate_views);
    r.branch = detail::branch_from_string(j.at("branch").get<std::string>());
}

inline void to_json(nlohmann::json& j, const EstimationResult& r) {
    nlohmann::json psi = nlohmann::json::array();
    for (const auto& row : r.psi) psi.push_back(detail::reals_to_json(row));
    j = nlohmann::json{{"p_hat", r.p_hat},
                       {"interval", {r.xi_lower, r.xi_upper}},
                       {"mu", detail::real_to_json(r.mu)},
                       {"per_view_p", r.per_view_p},
                       {"psi", psi},
                       {"below_set", r.below_set},
                       {"nearest_edge_index", r.nearest_edge_index},
                       {"range_begin", r.range_begin},
                       {"clamped", r.clamped}};
}

inline void from_json(const nlohmann::json& j, EstimationResult& r) {
    j.at("p_hat").get_to(r.p_hat);
    const auto& iv = j.at("interval");
    r.xi_lower = iv.at(0).get<double>();
    r.xi_upper = iv.at(1).get<double>();
    r.mu = detail::real_from_json(j.at("mu"));
    j.at("per_view_p").get_to(r.per_view_p);
    r.psi.clear();
    for (const auto& row : j.at("psi")) r.psi.push_back(detail::reals_from_json(row));
    j.at("below_set").get_to(r.below_set);
    j.at("nearest_edge_index").get_to(r.nearest_edge_index);
    j.at("range_begin").get_to(r.range_begin);
    j.at("clamped").get_to(r.clamped);
}

} // namespace rmtres
