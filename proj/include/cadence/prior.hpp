#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cadence {

// Independent Normal priors on the intensity coefficients, ascending power.
struct GaussianPrior {
    std::vector<double> mu;
    std::vector<double> sigma;

    [[nodiscard]] std::size_t dimension() const noexcept { return mu.size(); }

    // Throws ArgumentError unless lengths match, are non-empty and every sigma is a positive finite number.
    void validate() const;

    // Priors reported for the historical LEO data set: degree-3 coefficients
    // beta_0..beta_3 with mu = (8.58, -0.54, -0.60, -0.01), sigma = (3.42, 0.41, 0.37, 0.19).
    [[nodiscard]] static GaussianPrior reference();
};

// {"degree":3,"mu":[...],"sigma":[...]}
[[nodiscard]] std::string prior_to_json(const GaussianPrior& prior);
[[nodiscard]] GaussianPrior prior_from_json(std::string_view text);

} // namespace cadence
