#pragma once

#include <cstdint>
#include <string_view>

namespace cadence::cli {

struct RunConfig {
    double window_days{7.0};
    double cutoff_days_before_tca{2.5};
    std::size_t degree{3};
    double alpha{1.0};
    double bin_width{0.5};
    std::size_t chains{4};
    std::size_t draws{1000};
    std::size_t warmup{1000};
    std::uint64_t seed{0};
    double sigma_floor{1e-3};
    double clamp_floor{1e-6};

    // Throws ArgumentError naming the first violated constraint.
    void validate() const;

    // Overlays keys from a JSON object; unknown keys are a FormatError.
    void apply_json(std::string_view text);
};

} // namespace cadence::cli
