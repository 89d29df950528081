#include "run_config.hpp"

#include "cadence/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

namespace cadence::cli {

void RunConfig::validate() const {
    const auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw ArgumentError(std::string("invalid configuration: ") + what);
        }
    };
    require(window_days > 0.0 && std::isfinite(window_days), "window_days must be positive");
    require(cutoff_days_before_tca > 0.0, "cutoff_days_before_tca must be positive");
    require(cutoff_days_before_tca < window_days, "cutoff_days_before_tca must be less than window_days");
    require(degree <= 10, "degree must be at most 10");
    require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be non-negative");
    require(bin_width > 0.0 && std::isfinite(bin_width), "bin_width must be positive");
    require(chains >= 2, "chains must be at least 2");
    require(draws >= 1, "draws must be positive");
    require(warmup >= 1, "warmup must be positive");
    require(sigma_floor > 0.0 && std::isfinite(sigma_floor), "sigma_floor must be positive");
    require(clamp_floor > 0.0 && std::isfinite(clamp_floor), "clamp_floor must be positive");
}

void RunConfig::apply_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("config JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw FormatError("config JSON must be an object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "window_days") window_days = value.get<double>();
            else if (key == "cutoff_days_before_tca") cutoff_days_before_tca = value.get<double>();
            else if (key == "degree") degree = value.get<std::size_t>();
            else if (key == "alpha") alpha = value.get<double>();
            else if (key == "bin_width") bin_width = value.get<double>();
            else if (key == "chains") chains = value.get<std::size_t>();
            else if (key == "draws") draws = value.get<std::size_t>();
            else if (key == "warmup") warmup = value.get<std::size_t>();
            else if (key == "seed") seed = value.get<std::uint64_t>();
            else if (key == "sigma_floor") sigma_floor = value.get<double>();
            else if (key == "clamp_floor") clamp_floor = value.get<double>();
            else throw FormatError("config JSON: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config JSON: ") + e.what());
    }
}

} // namespace cadence::cli
