#include "cadence/prior.hpp"

#include "cadence/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace cadence {

void GaussianPrior::validate() const {
    if (mu.empty() || mu.size() != sigma.size()) {
        throw ArgumentError("prior mu and sigma must be non-empty and of equal length");
    }
    for (std::size_t j = 0; j < mu.size(); ++j) {
        if (!std::isfinite(mu[j]) || !(sigma[j] > 0.0) || !std::isfinite(sigma[j])) {
            throw ArgumentError("prior coefficient " + std::to_string(j) + " needs finite mu and positive sigma");
        }
    }
}

GaussianPrior GaussianPrior::reference() {
    return {{8.58, -0.54, -0.60, -0.01}, {3.42, 0.41, 0.37, 0.19}};
}

std::string prior_to_json(const GaussianPrior& prior) {
    prior.validate();
    nlohmann::ordered_json j;
    j["degree"] = prior.dimension() - 1;
    j["mu"] = prior.mu;
    j["sigma"] = prior.sigma;
    return j.dump() + "\n";
}

GaussianPrior prior_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("prior JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("mu") || !j.contains("sigma") || !j.contains("degree")) {
        throw FormatError("prior JSON must be an object with degree, mu and sigma");
    }
    GaussianPrior prior;
    try {
        prior.mu = j.at("mu").get<std::vector<double>>();
        prior.sigma = j.at("sigma").get<std::vector<double>>();
        const auto degree = j.at("degree").get<std::size_t>();
        if (prior.mu.size() != degree + 1) {
            throw FormatError("prior JSON: mu length must be degree + 1");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("prior JSON: ") + e.what());
    }
    try {
        prior.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("prior JSON: ") + e.what());
    }
    return prior;
}

} // namespace cadence
